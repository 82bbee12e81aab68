"""Deterministic seed derivation.

Every random stream in the project is keyed by a root seed plus a path of
labels (command, candidate index, rollout index, ...). Hashing the path gives
independent child seeds, so work units can run in any order, or in parallel,
without changing results.
"""

import hashlib


def derive_seed(root: int, *path) -> int:
    """Hash (root, *path) into a 64-bit child seed.

    Path parts may be ints or strings; they are joined with a separator so
    ("ab", "c") and ("a", "bc") derive different seeds.
    """
    h = hashlib.sha256()
    h.update(str(root).encode("utf-8"))
    for part in path:
        h.update(b"/")
        h.update(str(part).encode("utf-8"))
    return int.from_bytes(h.digest()[:8], "big")
