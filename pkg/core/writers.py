import io
from pathlib import Path

import pandas as pd
from rest_framework.parsers import JSONParser
from rest_framework.renderers import JSONRenderer

from core.exceptions import DataError, OilsignalError


class OutputDirectory:
    """All artifacts of a run, confined to one directory tree."""

    def __init__(self, root):
        self.root = Path(root).resolve()

    def path(self, *parts) -> Path:
        target = self.root.joinpath(*parts).resolve()
        if target != self.root and self.root not in target.parents:
            raise OilsignalError(f"refusing to write outside {self.root}: {target}")
        return target

    def _prepare(self, *parts) -> Path:
        target = self.path(*parts)
        target.parent.mkdir(parents=True, exist_ok=True)
        return target

    def write_json(self, data, *parts) -> Path:
        target = self._prepare(*parts)
        rendered = JSONRenderer().render(data, renderer_context={"indent": 2})
        target.write_bytes(rendered + b"\n")
        return target

    def write_csv(self, frame: pd.DataFrame, *parts, index: bool = True) -> Path:
        target = self._prepare(*parts)
        frame.to_csv(target, index=index, lineterminator="\n")
        return target

    def read_json(self, *parts):
        source = self.path(*parts)
        if not source.is_file():
            raise DataError(f"missing input: {source}")
        return JSONParser().parse(io.BytesIO(source.read_bytes()))

    def read_csv(self, *parts, **options) -> pd.DataFrame:
        source = self.path(*parts)
        if not source.is_file():
            raise DataError(f"missing input: {source}")
        return pd.read_csv(source, **options)
