# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import logging
from typing import (
    Any,
    Dict,
    Iterable,
    List,
    Mapping,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import numpy as np
from scipy.sparse import csr_matrix

from ..lattice import DyadicCube, LatticeWindow, cubes_to_array, scaled_distance
from ..seqspace import CoeffSequence

logger = logging.getLogger(__name__)

Pair = Tuple[DyadicCube, DyadicCube]

DEFAULT_CUTOFF = 1e-8


class AdEnvelope(NamedTuple):
    """Decay parameters ``(D, E, F)`` of the envelope ``u^{DEF}``."""

    D: float
    E: float
    F: float

    def minimum(self, other: "AdEnvelope") -> "AdEnvelope":
        """Componentwise minimum, an envelope dominated by both."""
        return AdEnvelope(
            min(self.D, other.D), min(self.E, other.E), min(self.F, other.F)
        )


class Certificate(NamedTuple):
    envelope: AdEnvelope
    C: float


def udef_entry(Q: DyadicCube, R: DyadicCube, env: AdEnvelope) -> float:
    """
    ``u^{DEF}_{QR}``: the scaled distance to the power ``-D`` times
    ``(ℓ(Q)/ℓ(R))^E`` when ``ℓ(Q) <= ℓ(R)`` and ``(ℓ(R)/ℓ(Q))^F`` otherwise.

    Examples
    --------
    >>> udef_entry(DyadicCube(1, (0,)), DyadicCube(0, (0,)), AdEnvelope(5.0, 2.0, 1.0))
    0.25
    """
    if Q.side <= R.side:
        size = (Q.side / R.side) ** env.E
    else:
        size = (R.side / Q.side) ** env.F
    return scaled_distance(Q, R) ** (-env.D) * size


def _udef_values(
    jq: np.ndarray, kq: np.ndarray, jr: np.ndarray, kr: np.ndarray, env: AdEnvelope
) -> np.ndarray:
    # scales broadcast against each other; positions carry a trailing axis of length n
    side_q = np.ldexp(1.0, -jq)
    side_r = np.ldexp(1.0, -jr)
    edge = np.maximum(side_q, side_r)
    distance = np.linalg.norm(
        np.ldexp(kq.astype(float), -jq[..., None])
        - np.ldexp(kr.astype(float), -jr[..., None]),
        axis=-1,
    )
    size = np.where(
        side_q <= side_r,
        (side_q / side_r) ** env.E,
        (side_r / side_q) ** env.F,
    )
    return (1.0 + distance / edge) ** (-env.D) * size


def udef_entries(
    rows: Sequence[DyadicCube], cols: Sequence[DyadicCube], env: AdEnvelope
) -> np.ndarray:
    """Vectorized :func:`udef_entry` over matching pairs ``(rows[i], cols[i])``."""
    jq, kq = cubes_to_array(rows)
    jr, kr = cubes_to_array(cols)
    return _udef_values(jq, kq, jr, kr, env)


def udef_block(
    rows: Sequence[DyadicCube], cols: Sequence[DyadicCube], env: AdEnvelope
) -> np.ndarray:
    """
    :func:`udef_entry` over all pairs, shape ``(len(rows), len(cols))``.

    Examples
    --------
    >>> cubes = [DyadicCube(0, (0,)), DyadicCube(0, (3,))]
    >>> udef_block(cubes, cubes, AdEnvelope(2.0, 1.0, 1.0)).round(4)
    array([[1.    , 0.0625],
           [0.0625, 1.    ]])
    """
    jq, kq = cubes_to_array(rows)
    jr, kr = cubes_to_array(cols)
    return _udef_values(jq[:, None], kq[:, None, :], jr[None, :], kr[None, :, :], env)


class OperatorMatrix:
    """
    A finitely supported matrix ``{u_{QR}}`` indexed by pairs of dyadic cubes, with
    an optional ``(D, E, F)`` decay certificate.

    Parameters
    ----------
    entries : Mapping[Tuple[DyadicCube, DyadicCube], complex]
        Stored entries ``(Q, R) -> u_{QR}``.
    n : int
        Dimension of the cubes.
    certificate : Optional[Certificate]
        Set by :func:`certify`.
    """

    def __init__(
        self,
        entries: Mapping[Pair, complex],
        n: int,
        certificate: Optional[Certificate] = None,
    ):
        self.entries: Dict[Pair, complex] = {
            pair: complex(value) for pair, value in entries.items()
        }
        self.n = n
        self.certificate = certificate

    @property
    def rows(self) -> List[DyadicCube]:
        return sorted({Q for Q, _ in self.entries}, key=lambda Q: (Q.j, Q.k))

    @property
    def cols(self) -> List[DyadicCube]:
        return sorted({R for _, R in self.entries}, key=lambda Q: (Q.j, Q.k))

    def __getitem__(self, pair: Pair) -> complex:
        return self.entries.get(pair, 0j)

    def __len__(self) -> int:
        return len(self.entries)

    def __mul__(self, scalar: complex) -> "OperatorMatrix":
        certificate = None
        if self.certificate is not None:
            certificate = Certificate(
                self.certificate.envelope, abs(scalar) * self.certificate.C
            )
        return OperatorMatrix(
            {pair: scalar * value for pair, value in self.entries.items()},
            self.n,
            certificate,
        )

    __rmul__ = __mul__

    def restricted(self, pairs: Iterable[Pair]) -> "OperatorMatrix":
        return OperatorMatrix(
            {pair: self.entries[pair] for pair in pairs if pair in self.entries}, self.n
        )

    def to_csr(
        self,
        rows: Optional[Sequence[DyadicCube]] = None,
        cols: Optional[Sequence[DyadicCube]] = None,
    ) -> csr_matrix:
        """
        The entries as a ``scipy.sparse.csr_matrix`` over the given row and column
        orderings (the sorted stored cubes by default). Entries outside them are left
        out.
        """
        rows = self.rows if rows is None else list(rows)
        cols = self.cols if cols is None else list(cols)
        row_index = {Q: i for i, Q in enumerate(rows)}
        col_index = {R: i for i, R in enumerate(cols)}
        data, row_ids, col_ids = [], [], []
        for (Q, R), value in self.entries.items():
            if Q in row_index and R in col_index:
                data.append(value)
                row_ids.append(row_index[Q])
                col_ids.append(col_index[R])
        return csr_matrix(
            (np.asarray(data, dtype=complex), (row_ids, col_ids)),
            shape=(len(rows), len(cols)),
        )

    def to_json(self) -> Dict[str, Any]:
        certificate = None
        if self.certificate is not None:
            certificate = {
                "envelope": self.certificate.envelope._asdict(),
                "C": self.certificate.C,
            }
        return {
            "n": self.n,
            "entries": [
                {
                    "row": Q.to_dict(),
                    "col": R.to_dict(),
                    "re": value.real,
                    "im": value.imag,
                }
                for (Q, R), value in sorted(
                    self.entries.items(),
                    key=lambda item: (item[0][0].j, item[0][0].k, item[0][1].j, item[0][1].k),
                )
            ],
            "certificate": certificate,
        }

    def __repr__(self) -> str:
        return f"OperatorMatrix(n={self.n}, entries={len(self)}, certificate={self.certificate})"


def identity_matrix(cubes: Iterable[DyadicCube]) -> OperatorMatrix:
    cubes = list(cubes)
    n = cubes[0].n if cubes else 1
    return OperatorMatrix({(Q, Q): 1.0 for Q in cubes}, n)


def envelope_matrix(
    cubes: Sequence[DyadicCube],
    env: AdEnvelope,
    cols: Optional[Sequence[DyadicCube]] = None,
) -> OperatorMatrix:
    """
    ``u^{DEF}`` itself on ``cubes × cols`` (``cubes × cubes`` by default), with every
    pair stored. Whole windows are better served by :class:`EnvelopeOperator`.
    """
    cubes = list(cubes)
    cols = cubes if cols is None else list(cols)
    n = cubes[0].n if cubes else 1
    if not cubes or not cols:
        return OperatorMatrix({}, n)
    values = udef_block(cubes, cols, env)
    return OperatorMatrix(
        {(Q, R): values[i, k] for i, Q in enumerate(cubes) for k, R in enumerate(cols)},
        n,
    )


class EnvelopeOperator:
    """
    ``scale · u^{DEF}`` on ``cubes × cubes``, held implicitly.

    Nothing is stored per pair. :func:`apply` evaluates only the columns a sequence
    is supported on, so one application costs ``len(cubes) × len(t)`` entries. The
    certificate ``C = |scale|`` is exact.

    Parameters
    ----------
    cubes : Sequence[DyadicCube]
        Row and column cubes.
    envelope : AdEnvelope
        The decay parameters.
    scale : complex
        Multiplier of every entry.
    """

    def __init__(
        self, cubes: Sequence[DyadicCube], envelope: AdEnvelope, scale: complex = 1.0
    ):
        self.cubes: List[DyadicCube] = sorted(cubes, key=lambda Q: (Q.j, Q.k))
        self.envelope = envelope
        self.scale = scale
        self.n = self.cubes[0].n if self.cubes else 1
        self.certificate = Certificate(envelope, abs(scale))
        self._members = set(self.cubes)
        self._scales, self._positions = cubes_to_array(self.cubes)

    def __contains__(self, Q: object) -> bool:
        return Q in self._members

    def __len__(self) -> int:
        return len(self.cubes) ** 2

    def __mul__(self, scalar: complex) -> "EnvelopeOperator":
        return EnvelopeOperator(self.cubes, self.envelope, scalar * self.scale)

    __rmul__ = __mul__

    def columns(self, cols: Sequence[DyadicCube]) -> np.ndarray:
        """Entries ``scale · u^{DEF}_{QR}`` for every row ``Q`` and the given ``R``."""
        jr, kr = cubes_to_array(cols)
        values = _udef_values(
            self._scales[:, None],
            self._positions[:, None, :],
            jr[None, :],
            kr[None, :, :],
            self.envelope,
        )
        return self.scale * values

    def materialize(self) -> OperatorMatrix:
        """The same operator with every pair stored."""
        U = self.scale * envelope_matrix(self.cubes, self.envelope)
        U.certificate = self.certificate
        return U

    def __repr__(self) -> str:
        return (
            f"EnvelopeOperator(n={self.n}, cubes={len(self.cubes)}, "
            f"envelope={self.envelope}, scale={self.scale})"
        )


Operator = Union[OperatorMatrix, EnvelopeOperator]


def certify(U: OperatorMatrix, env: AdEnvelope) -> float:
    """
    The smallest ``C`` with ``|u_{QR}| <= C u^{DEF}_{QR}`` over the stored entries.
    The certificate is attached to ``U``.

    Parameters
    ----------
    U : OperatorMatrix
        The matrix to certify.
    env : AdEnvelope
        The envelope.

    Returns
    -------
    float
        ``C``; zero for an empty matrix. It can only grow as entries are added.
    """
    if len(U) == 0:
        C = 0.0
    else:
        pairs = list(U.entries)
        magnitudes = np.abs(np.array([U.entries[pair] for pair in pairs]))
        envelope = udef_entries([Q for Q, _ in pairs], [R for _, R in pairs], env)
        C = float(np.max(magnitudes / envelope))
    U.certificate = Certificate(env, C)
    logger.info(f"Certified {len(U)} entries against {env} with C={C:.6g}")
    return C


class ApplyResult(NamedTuple):
    """``U t`` and the bound ``Σ |u_{QR}| |t_R|`` over entries below the cutoff."""

    sequence: CoeffSequence
    dropped_mass: float


def apply(U: Operator, t: CoeffSequence, cutoff: float = DEFAULT_CUTOFF) -> ApplyResult:
    """
    ``(U t)_Q = Σ_R u_{QR} t_R`` over stored entries with
    ``|u_{QR}| >= cutoff · max |u|``.

    Parameters
    ----------
    U : Union[OperatorMatrix, EnvelopeOperator]
        The matrix. An :class:`EnvelopeOperator` is evaluated on the support of
        ``t`` only.
    t : CoeffSequence
        The input sequence.
    cutoff : float
        Relative truncation threshold; ``0`` keeps every entry.

    Returns
    -------
    ApplyResult
    """
    if U.n != t.n:
        raise ValueError(f"Matrix acts on R^{U.n}, sequence lives in R^{t.n}")
    if len(U) == 0 or len(t) == 0:
        return ApplyResult(CoeffSequence.empty(t.n, t.m), 0.0)
    if isinstance(U, EnvelopeOperator):
        return _apply_envelope(U, t, cutoff)
    largest = max(abs(value) for value in U.entries.values())
    threshold = cutoff * largest
    kept: Dict[Pair, complex] = {}
    dropped = 0.0
    for (Q, R), value in U.entries.items():
        if R not in t:
            continue
        if abs(value) >= threshold:
            kept[(Q, R)] = value
        else:
            dropped += abs(value) * float(np.linalg.norm(t[R]))
    truncated = OperatorMatrix(kept, U.n)
    rows = truncated.rows
    if not rows:
        return ApplyResult(CoeffSequence.empty(t.n, t.m), dropped)
    cols = truncated.cols
    values = truncated.to_csr(rows, cols) @ np.array([t[R] for R in cols])
    return ApplyResult(
        CoeffSequence(dict(zip(rows, values)), t.n, t.m), dropped
    )


def _apply_envelope(U: EnvelopeOperator, t: CoeffSequence, cutoff: float) -> ApplyResult:
    cols = [R for R in t.support if R in U]
    if not cols:
        return ApplyResult(CoeffSequence.empty(t.n, t.m), 0.0)
    block = U.columns(cols)
    magnitudes = np.abs(block)
    # the unit diagonal of u^{DEF} is its largest entry
    kept = magnitudes >= cutoff * abs(U.scale)
    coefficients = np.array([t[R] for R in cols]).reshape(len(cols), -1)
    dropped = float(
        np.where(kept, 0.0, magnitudes).sum(axis=0) @ np.linalg.norm(coefficients, axis=1)
    )
    hit = np.flatnonzero(kept.any(axis=1))
    if hit.size == 0:
        return ApplyResult(CoeffSequence.empty(t.n, t.m), dropped)
    values = np.where(kept, block, 0.0)[hit].astype(complex) @ coefficients
    rows = [U.cubes[i] for i in hit]
    return ApplyResult(CoeffSequence(dict(zip(rows, values)), t.n, t.m), dropped)


def compose(
    U1: OperatorMatrix,
    U2: OperatorMatrix,
    window: Optional[LatticeWindow] = None,
) -> OperatorMatrix:
    """
    The product ``Σ_P u1_{QP} u2_{PR}`` with ``P`` restricted to ``window`` when
    given, re-certified against the componentwise minimum of the input envelopes.

    Raises
    ------
    ValueError
        If an input has no certificate.
    """
    if U1.certificate is None or U2.certificate is None:
        raise ValueError("compose needs certified inputs")
    middle = sorted(set(U1.cols) & set(U2.rows), key=lambda Q: (Q.j, Q.k))
    if window is not None:
        middle = [P for P in middle if P in window]
    rows, cols = U1.rows, U2.cols
    product = (U1.to_csr(rows, middle) @ U2.to_csr(middle, cols)).tocoo()
    entries = {
        (rows[i], cols[k]): value
        for i, k, value in zip(product.row, product.col, product.data)
    }
    result = OperatorMatrix(entries, U1.n)
    certify(result, U1.certificate.envelope.minimum(U2.certificate.envelope))
    return result
