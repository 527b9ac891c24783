"""
End-to-end channel H (v_R = H v_T) at every modelling fidelity.

general        full N-port network, any terminations
unilateral     TI, TR, IR blocks zero (no feedback towards the transmitter)
matched        perfectly matched antennas, optionally keeping RIS coupling Z_II
widely_used    H_RT + H_RI Θ H_IT, with exact or Neumann H_RT
"""
from typing import Optional, Union

import numpy as np
from scipy.linalg import block_diag

from backend.core.errors import KindMismatch, NotUnilateral, SingularSystem
from backend.core.linalg import checked_inv, checked_solve, right_solve
from backend.models import (
    ChannelBlocks,
    ChannelMatrix,
    Fidelity,
    NetworkMatrix,
    OpenCircuit,
    ParameterKind,
    ParameterMapping,
    RISConfiguration,
    TerminationSet,
)
from backend.ris_service.architectures import termination_matrix
from backend.ris_service.netparams import convert, reflection_of

__all__ = [
    "general_channel",
    "unilateral_channel",
    "matched_channel",
    "map_unilateral",
    "map_matched",
    "neumann_srt",
    "widely_used_channel",
    "widely_used_from_z",
    "source_referred_channel",
    "build_channel",
]

RISState = Union[RISConfiguration, np.ndarray, OpenCircuit]


def _check_kind(net, kind: ParameterKind) -> None:
    if net.kind != kind:
        raise KindMismatch(f"expected {kind.value}-parameters, got {net.kind.value}")


def _reduced_impedance(net: NetworkMatrix, terms: TerminationSet):
    """Z, Zbar and the T/R index sets; open-circuited RIS ports carry no current and drop out."""
    sl = net.partition.slices()
    n_t, n_i, n_r = net.partition.sizes()
    if terms.ris_open:
        keep = np.r_[np.arange(n_t), np.arange(n_t + n_i, net.partition.n)]
        z = net.values[np.ix_(keep, keep)]
        zbar = block_diag(terms.z_t, terms.z_r)
        return z, zbar, slice(0, n_t), slice(n_t, n_t + n_r)
    zbar = block_diag(terms.z_t, terms.z_i, terms.z_r)
    return np.asarray(net.values), zbar, sl["T"], sl["R"]


def general_channel(kind: ParameterKind, net: NetworkMatrix, terms: TerminationSet) -> ChannelMatrix:
    _check_kind(net, kind)
    if kind == ParameterKind.Z:
        z, zbar, t, r = _reduced_impedance(net, terms)
        # Ztilde = (I + Zbar Z^-1)^-1 = Z (Z + Zbar)^-1
        zt = right_solve(z, z + zbar, "Z + Zbar", SingularSystem)
        h = right_solve(zt[r, t], zt[t, t], "Ztilde_TT", SingularSystem)
        return ChannelMatrix(h=h, fidelity=Fidelity.GENERAL)

    sl = net.partition.slices()
    t, r = sl["T"], sl["R"]
    n = net.partition.n
    if kind == ParameterKind.Y:
        y = np.asarray(net.values)
        ybar = block_diag(terms.y_t, terms.y_i, terms.y_r)
        yt = right_solve(y, y + ybar, "Y + Ybar", SingularSystem)
        n_t = net.partition.n_t
        h = checked_solve(terms.y_r, yt[r, t], "Y_R", SingularSystem)
        h = right_solve(h, yt[t, t] - np.eye(n_t), "Ytilde_TT - I", SingularSystem) @ terms.y_t
        return ChannelMatrix(h=h, fidelity=Fidelity.GENERAL)

    s = np.asarray(net.values)
    gamma = block_diag(terms.gamma_t, terms.theta, terms.gamma_r)
    st = right_solve(s, np.eye(n) - gamma @ s, "I - Γ S", SingularSystem)
    n_t, n_r = net.partition.n_t, net.partition.n_r
    h = (terms.gamma_r + np.eye(n_r)) @ right_solve(
        st[r, t], np.eye(n_t) + terms.gamma_t @ st[t, t] + st[t, t], "I + Γ_T S̃_TT + S̃_TT", SingularSystem
    )
    return ChannelMatrix(h=h, fidelity=Fidelity.GENERAL)


def unilateral_channel(kind: ParameterKind, net: NetworkMatrix, terms: TerminationSet,
                       tol: float = 1e-14) -> ChannelMatrix:
    _check_kind(net, kind)
    limit = tol * np.linalg.norm(net.values)
    for name in ("TI", "TR", "IR"):
        norm = np.linalg.norm(net.block(name))
        if norm > limit:
            raise NotUnilateral(f"block {name} is not zero (norm {norm:.3e})")

    b = net.blocks()
    n_i = net.partition.n_i
    if kind == ParameterKind.Z:
        path = b["RT"]
        if not terms.ris_open:
            path = path - b["RI"] @ checked_solve(terms.z_i + b["II"], b["IT"], "Z_I + Z_II", SingularSystem)
        h = terms.z_r @ checked_solve(terms.z_r + b["RR"], path, "Z_R + Z_RR", SingularSystem)
        h = right_solve(h, b["TT"], "Z_TT", SingularSystem)
    elif kind == ParameterKind.Y:
        path = -b["RT"] + b["RI"] @ checked_solve(terms.y_i + b["II"], b["IT"], "Y_I + Y_II", SingularSystem)
        h = checked_solve(terms.y_r + b["RR"], path, "Y_R + Y_RR", SingularSystem)
    else:
        theta = terms.theta
        n_r, n_t = net.partition.n_r, net.partition.n_t
        ris = checked_solve(np.eye(n_i) - theta @ b["II"], theta @ b["IT"], "I - Θ S_II", SingularSystem)
        path = b["RT"] + b["RI"] @ ris
        h = (terms.gamma_r + np.eye(n_r)) @ checked_solve(
            np.eye(n_r) - b["RR"] @ terms.gamma_r, path, "I - S_RR Γ_R", SingularSystem
        )
        h = right_solve(h, np.eye(n_t) + b["TT"], "I + S_TT", SingularSystem)
    return ChannelMatrix(h=h, fidelity=Fidelity.UNILATERAL)


def _ris_termination(ris: RISState, kind: ParameterKind):
    if isinstance(ris, RISConfiguration):
        return termination_matrix(ris, kind)
    if isinstance(ris, OpenCircuit):
        return ris
    return np.atleast_2d(np.asarray(ris, dtype=complex))


def matched_channel(kind: ParameterKind, blocks: ChannelBlocks, ris: RISState,
                    ris_coupling: Optional[np.ndarray] = None) -> ChannelMatrix:
    """Perfectly matched antennas.

    Without ``ris_coupling`` the RIS self-block is Z0 I / Y0 I / 0; with it,
    Z_II / Y_II / S_II in the blocks' own kind.
    """
    _check_kind(blocks, kind)
    term = _ris_termination(ris, kind)
    z0 = blocks.z0
    n_i = blocks.n_i
    eye = np.eye(n_i)
    coupled = ris_coupling is not None
    fidelity = Fidelity.MATCHED_WITH_RIS_COUPLING if coupled else Fidelity.MATCHED

    if kind == ParameterKind.Z:
        h = np.array(blocks.rt, dtype=complex)
        if not isinstance(term, OpenCircuit):
            z_ii = np.asarray(ris_coupling) if coupled else z0 * eye
            h = h - blocks.ri @ checked_solve(term + z_ii, blocks.it, "Z_I + Z_II", SingularSystem)
        return ChannelMatrix(h=h / (2 * z0), fidelity=fidelity)

    if isinstance(term, OpenCircuit):
        term = np.zeros((n_i, n_i)) if kind == ParameterKind.Y else eye

    if kind == ParameterKind.Y:
        y_ii = np.asarray(ris_coupling) if coupled else eye / z0
        h = -blocks.rt + blocks.ri @ checked_solve(term + y_ii, blocks.it, "Y_I + Y_II", SingularSystem)
        return ChannelMatrix(h=h * z0 / 2, fidelity=fidelity)

    if coupled:
        ris_path = checked_solve(eye - term @ ris_coupling, term @ blocks.it, "I - Θ S_II", SingularSystem)
    else:
        ris_path = term @ blocks.it
    return ChannelMatrix(h=blocks.rt + blocks.ri @ ris_path, fidelity=fidelity)


def map_unilateral(net: NetworkMatrix) -> ParameterMapping:
    """Y- and S-blocks of a unilateral network expressed through its Z-blocks."""
    _check_kind(net, ParameterKind.Z)
    b = net.blocks()
    z0 = net.z0
    eye = {k: np.eye(n) for k, n in zip("TIR", net.partition.sizes())}

    inv_tt = checked_inv(b["TT"], "Z_TT")
    inv_ii = checked_inv(b["II"], "Z_II")
    inv_rr = checked_inv(b["RR"], "Z_RR")
    y_ri = -inv_rr @ b["RI"] @ inv_ii
    y_it = -inv_ii @ b["IT"] @ inv_tt
    y_rt = inv_rr @ (-b["RT"] + b["RI"] @ inv_ii @ b["IT"]) @ inv_tt

    sh_tt = checked_inv(b["TT"] + z0 * eye["T"], "Z_TT + Z0 I")
    sh_ii = checked_inv(b["II"] + z0 * eye["I"], "Z_II + Z0 I")
    sh_rr = checked_inv(b["RR"] + z0 * eye["R"], "Z_RR + Z0 I")
    s_ri = 2 * z0 * sh_rr @ b["RI"] @ sh_ii
    s_it = 2 * z0 * sh_ii @ b["IT"] @ sh_tt
    s_rt = 2 * z0 * sh_rr @ (b["RT"] - b["RI"] @ sh_ii @ b["IT"]) @ sh_tt

    return ParameterMapping(
        y=ChannelBlocks(kind=ParameterKind.Y, rt=y_rt, ri=y_ri, it=y_it, ii=inv_ii, z0=z0),
        s=ChannelBlocks(kind=ParameterKind.S, rt=s_rt, ri=s_ri, it=s_it,
                        ii=reflection_of(b["II"], z0), z0=z0),
    )


def map_matched(blocks: ChannelBlocks) -> ParameterMapping:
    """Matched-antenna mappings from Z-blocks.

    With ``blocks.ii`` set the RIS mutual coupling is kept; otherwise the fully
    matched closed forms (Z_II = Z0 I) apply.
    """
    _check_kind(blocks, ParameterKind.Z)
    z0 = blocks.z0
    rt, ri, it = blocks.rt, blocks.ri, blocks.it

    if blocks.ii is None:
        y = ChannelBlocks(kind=ParameterKind.Y, rt=(-rt + ri @ it / z0) / z0**2,
                          ri=-ri / z0**2, it=-it / z0**2, z0=z0)
        s = ChannelBlocks(kind=ParameterKind.S, rt=(rt - ri @ it / (2 * z0)) / (2 * z0),
                          ri=ri / (2 * z0), it=it / (2 * z0), z0=z0)
        return ParameterMapping(y=y, s=s)

    z_ii = np.asarray(blocks.ii)
    eye = np.eye(blocks.n_i)
    inv_ii = checked_inv(z_ii, "Z_II")
    sh_ii = checked_inv(z_ii + z0 * eye, "Z_II + Z0 I")
    y = ChannelBlocks(kind=ParameterKind.Y, rt=(-rt + ri @ inv_ii @ it) / z0**2,
                      ri=-ri @ inv_ii / z0, it=-inv_ii @ it / z0, ii=inv_ii, z0=z0)
    s = ChannelBlocks(kind=ParameterKind.S, rt=(rt - ri @ sh_ii @ it) / (2 * z0),
                      ri=ri @ sh_ii, it=sh_ii @ it, ii=reflection_of(z_ii, z0), z0=z0)
    return ParameterMapping(y=y, s=s)


def neumann_srt(z_rt, z0: float) -> np.ndarray:
    """First-order Neumann approximation S_RT ≈ Z_RT / (2 Z0)."""
    return np.asarray(z_rt, dtype=complex) / (2 * z0)


def widely_used_channel(h_rt, h_ri, h_it, theta,
                        fidelity: Fidelity = Fidelity.WIDELY_USED) -> ChannelMatrix:
    h = np.atleast_2d(h_rt) + np.atleast_2d(h_ri) @ np.atleast_2d(theta) @ np.atleast_2d(h_it)
    return ChannelMatrix(h=h, fidelity=fidelity)


def widely_used_from_z(blocks: ChannelBlocks, theta, neumann: bool = False) -> ChannelMatrix:
    _check_kind(blocks, ParameterKind.Z)
    s = map_matched(ChannelBlocks(kind=ParameterKind.Z, rt=blocks.rt, ri=blocks.ri,
                                  it=blocks.it, z0=blocks.z0)).s
    if neumann:
        return widely_used_channel(neumann_srt(blocks.rt, blocks.z0), s.ri, s.it, theta,
                                   Fidelity.WIDELY_USED_NEUMANN)
    return widely_used_channel(s.rt, s.ri, s.it, theta)


def source_referred_channel(net: NetworkMatrix, terms: TerminationSet) -> np.ndarray:
    """H_s with v_R = H_s v_{s,T}; the source-voltage alternative to H."""
    z, zbar, t, r = _reduced_impedance(convert(net, ParameterKind.Z), terms)
    zt = right_solve(z, z + zbar, "Z + Zbar", SingularSystem)
    return zt[r, t]


def build_channel(fidelity: Fidelity, *, kind: Optional[ParameterKind] = None,
                  net: Optional[NetworkMatrix] = None, terms: Optional[TerminationSet] = None,
                  blocks: Optional[ChannelBlocks] = None, ris: Optional[RISState] = None,
                  ris_coupling: Optional[np.ndarray] = None) -> ChannelMatrix:
    """Single entry point over all fidelity levels."""
    if fidelity == Fidelity.GENERAL:
        return general_channel(kind or net.kind, net, terms)
    if fidelity == Fidelity.UNILATERAL:
        return unilateral_channel(kind or net.kind, net, terms)
    if fidelity == Fidelity.MATCHED:
        return matched_channel(kind or blocks.kind, blocks, ris)
    if fidelity == Fidelity.MATCHED_WITH_RIS_COUPLING:
        coupling = ris_coupling if ris_coupling is not None else blocks.ii
        if coupling is None:
            raise ValueError("matched_with_ris_coupling needs a coupling matrix")
        return matched_channel(kind or blocks.kind, blocks, ris, coupling)

    theta = _ris_termination(ris, ParameterKind.S)
    if blocks.kind == ParameterKind.Z:
        return widely_used_from_z(blocks, theta, neumann=fidelity == Fidelity.WIDELY_USED_NEUMANN)
    if fidelity == Fidelity.WIDELY_USED_NEUMANN:
        raise KindMismatch("the Neumann approximation needs Z-blocks")
    _check_kind(blocks, ParameterKind.S)
    return widely_used_channel(blocks.rt, blocks.ri, blocks.it, theta)
