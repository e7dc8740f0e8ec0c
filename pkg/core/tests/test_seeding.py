from django.test import SimpleTestCase

from core.seeding import derive_seed


class DeriveSeedTests(SimpleTestCase):
    def test_same_inputs_same_seed(self):
        self.assertEqual(derive_seed(7, "rf"), derive_seed(7, "rf"))

    def test_components_get_different_seeds(self):
        seeds = {derive_seed(7, name) for name in ("rf", "lstm", "search:rf", "knn")}

        self.assertEqual(len(seeds), 4)

    def test_master_seed_shifts_every_component(self):
        self.assertNotEqual(derive_seed(7, "rf"), derive_seed(8, "rf"))
        self.assertEqual((derive_seed(8, "rf") - derive_seed(7, "rf")) % 2**32, 1)

    def test_seed_fits_numpy_range(self):
        for master in (0, 2**32 - 1, 2**40):
            self.assertTrue(0 <= derive_seed(master, "lstm") < 2**32)

