"""Derived seeds for reproducible runs."""

import hashlib


def derive_seed(master_seed: int, *parts: object) -> int:
    """
    Derive a 32-bit seed from a master seed and identifying parts.

    Adding new parts (datasets, algorithms) never changes the seeds of existing ones.

    Args:
        master_seed: Run-level seed
        parts: Identifiers such as dataset name, algorithm ordinal, repeat index

    Returns:
        Integer in [0, 2**32)
    """
    text = "|".join([str(master_seed), *(str(part) for part in parts)])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "little")
