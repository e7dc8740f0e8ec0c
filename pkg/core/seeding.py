import hashlib


def derive_seed(master: int, component: str) -> int:
    """Stable per-component seed: sha256(component) folded with the master."""
    digest = hashlib.sha256(component.encode("utf-8")).digest()
    offset = int.from_bytes(digest[:4], "big")
    return (int(master) + offset) % 2**32
