"""Append-only certificate directory: one JSON file per certificate plus a CSV index."""

from __future__ import annotations

import csv
import json
import threading
from pathlib import Path

from .adversary import ExitFlagCertificate, FailureCertificate, verify_record
from .errors import CertificateError

INDEX = "index.csv"
COLUMNS = ("file", "type", "solver", "checker", "N1", "verdict", "fuel", "descriptor_bytes")


def payload(cert) -> str:
    """Canonical JSON text of a certificate; byte-identical across runs."""
    return json.dumps(cert.record(), sort_keys=True, indent=2) + "\n"


class CertificateStore:
    def __init__(self, root):
        self.root = Path(root)
        self._lock = threading.Lock()

    def _index_path(self) -> Path:
        return self.root / INDEX

    def entries(self) -> list:
        path = self._index_path()
        if not path.exists():
            return []
        with open(path, newline="", encoding="utf-8") as fh:
            return list(csv.DictReader(fh))

    def append(self, cert) -> Path:
        with self._lock:
            self.root.mkdir(parents=True, exist_ok=True)
            entries = self.entries()
            name = f"cert-{len(entries) + 1:06d}.json"
            path = self.root / name
            if path.exists():
                raise CertificateError(f"{path} already exists; the index is out of sync")
            path.write_text(payload(cert), encoding="utf-8")
            rec = cert.record()
            row = {
                "file": name,
                "type": rec["type"],
                "solver": rec["solver"],
                "checker": rec.get("checker", ""),
                "N1": rec["N1"],
                "verdict": rec["verdict"],
                "fuel": rec["fuel"],
                "descriptor_bytes": rec["descriptor_bytes"],
            }
            new = not self._index_path().exists()
            with open(self._index_path(), "a", newline="", encoding="utf-8") as fh:
                w = csv.DictWriter(fh, COLUMNS)
                if new:
                    w.writeheader()
                w.writerow(row)
            return path

    def load(self, rerun: bool = False, resolver=None) -> list:
        """Read and re-verify every indexed certificate."""
        out = []
        for row in self.entries():
            rec = json.loads((self.root / row["file"]).read_text(encoding="utf-8"))
            out.append(verify_record(rec, rerun, resolver))
        return out


__all__ = ["CertificateStore", "payload", "FailureCertificate", "ExitFlagCertificate"]
