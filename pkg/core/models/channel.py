from dataclasses import dataclass, field, replace

import numpy as np

from core.types import ComplexArray


@dataclass(frozen=True)
class SlotTaps:
    """Time-domain taps of every link during one time slot.

    Scalar links are ``(L,)`` arrays, RIS links are ``(M, L)`` arrays.
    """

    g_sr: ComplexArray
    g_rd: ComplexArray
    h_si: ComplexArray
    h_ir: ComplexArray
    h_id: ComplexArray
    h_ri: ComplexArray


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of all wideband channels.

    Frequency responses are stored per subcarrier: scalars are ``(N,)`` and RIS links are
    ``(N, M)``, so ``h_si[p]`` is the M-vector seen on subcarrier ``p``. The cascaded
    vectors satisfy ``v @ a[p] == h_ir[p].conj() @ np.diag(v) @ h_si[p]``.
    """

    taps: tuple[SlotTaps, SlotTaps]

    g_sr: ComplexArray  # slot 1
    g_rd: ComplexArray  # slot 2
    h_si: ComplexArray  # slot 1
    h_ir: ComplexArray  # slot 1
    h_id1: ComplexArray  # slot 1
    h_id2: ComplexArray  # slot 2
    h_ri: ComplexArray  # slot 2

    a: ComplexArray = field(repr=False)  # source-RIS-relay, slot 1
    b: ComplexArray = field(repr=False)  # relay-RIS-destination, slot 2
    c: ComplexArray = field(repr=False)  # source-RIS-destination, slot 1

    @property
    def n_subcarriers(self) -> int:
        return self.g_sr.shape[0]

    @property
    def n_elements(self) -> int:
        return self.h_si.shape[1]

    def without_ris(self) -> "ChannelRealization":
        """Same direct links with every RIS link removed (M = 0)."""
        n = self.n_subcarriers
        empty = np.zeros((n, 0), dtype=np.complex128)
        taps = tuple(
            replace(
                slot,
                h_si=slot.h_si[:0],
                h_ir=slot.h_ir[:0],
                h_id=slot.h_id[:0],
                h_ri=slot.h_ri[:0],
            )
            for slot in self.taps
        )
        return replace(
            self,
            taps=taps,  # type: ignore[arg-type]
            h_si=empty,
            h_ir=empty,
            h_id1=empty,
            h_id2=empty,
            h_ri=empty,
            a=empty,
            b=empty,
            c=empty,
        )
