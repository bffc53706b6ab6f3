"""Counter-based random number streams.

All randomness in the package flows through Philox (a counter-based
generator), keyed by 128-bit seeds derived with :func:`derive_seed`.  The
derivation is a SHA-256 hash of the parent seed and a path of labels, so

* independent streams never depend on execution order (replicate 7 draws the
  same numbers whether it runs first, last, or on another process), and
* nested derivations (study -> replicate -> imputation) cannot collide.

Dataset generation consumes uniforms in subject-major order: one row of
``draws_per_subject`` doubles per subject, rows laid out consecutively.
Because Philox emits 4 doubles per counter block, any block of subjects
starting at an index divisible by 4 can be regenerated independently with
:func:`uniforms_subject_major`, which is how large interventional oracles are
produced in bounded memory while remaining bit-identical to a serial pass.

Normal variates are produced by applying the inverse normal CDF to uniforms
(no ziggurat), which keeps streams reproducible across platforms and numpy
versions.
"""

import hashlib

import numpy as np
from scipy.special import ndtri

_KEY_MASK = (1 << 128) - 1
# smallest uniform we feed to ndtri; Generator.random() is in [0, 1)
_U_FLOOR = 2.0**-53


def derive_seed(seed: int, *path) -> int:
    """Derive a child 128-bit seed from ``seed`` and a path of labels.

    Labels may be ints or strings; they are hashed, not concatenated, so
    ("ab", "c") and ("a", "bc") give unrelated children.
    """
    h = hashlib.sha256()
    h.update(str(int(seed)).encode())
    for part in path:
        h.update(b"\x00")
        h.update(str(part).encode())
    return int.from_bytes(h.digest()[:16], "little")


def philox(seed: int, *path) -> np.random.Generator:
    """A Generator over Philox keyed by ``derive_seed(seed, *path)``."""
    key = derive_seed(seed, *path) if path else int(seed) & _KEY_MASK
    return np.random.Generator(np.random.Philox(key=key))


def uniforms_subject_major(
    seed: int, n_subjects: int, draws_per_subject: int, first_subject: int = 0
) -> np.ndarray:
    """Uniform draws for subjects ``first_subject .. first_subject+n_subjects-1``.

    Returns an (n_subjects, draws_per_subject) array; row i holds the draws
    of subject ``first_subject + i``.  ``first_subject`` must be a multiple
    of 4 so the Philox counter can be advanced in whole blocks; the result is
    then identical to the corresponding rows of a single full-size call.
    """
    if first_subject % 4 != 0:
        raise ValueError("first_subject must be a multiple of 4")
    bg = np.random.Philox(key=int(seed) & _KEY_MASK)
    skip_words = first_subject * draws_per_subject
    if skip_words:
        bg.advance(skip_words // 4)
    return np.random.Generator(bg).random((n_subjects, draws_per_subject))


def normals_from_uniforms(u: np.ndarray) -> np.ndarray:
    """Standard normals via the inverse CDF; guards against u == 0."""
    return ndtri(np.maximum(u, _U_FLOOR))
