"""Named parameter collections with frozen/trainable bookkeeping."""

from __future__ import annotations

import numpy as np

from ..errors import NavgateError
from .tensor import Tensor


class ParameterStore:
    """Ordered map name -> parameter Tensor.

    Iteration is always lexicographic by name so optimizer sweeps, checkpoint
    layout, and gradient probes are deterministic. The trainable flag is the
    tensor's requires_grad: frozen entries never receive gradients and are
    never touched by optimizer steps.
    """

    def __init__(self):
        self._entries: dict[str, Tensor] = {}

    def add(self, name: str, value: np.ndarray, trainable: bool = True) -> Tensor:
        if name in self._entries:
            raise NavgateError(f"duplicate parameter name: {name}")
        t = Tensor(np.array(value, dtype=np.float64), requires_grad=trainable)
        self._entries[name] = t
        return t

    def __contains__(self, name: str) -> bool:
        return name in self._entries

    def __getitem__(self, name: str) -> Tensor:
        return self._entries[name]

    def __len__(self) -> int:
        return len(self._entries)

    def names(self) -> list[str]:
        return sorted(self._entries)

    def items(self):
        for name in self.names():
            yield name, self._entries[name]

    def trainable_names(self) -> list[str]:
        return [n for n in self.names() if self._entries[n].requires_grad]

    def frozen_names(self) -> list[str]:
        return [n for n in self.names() if not self._entries[n].requires_grad]

    def set_trainable(self, name: str, flag: bool) -> None:
        self._entries[name].requires_grad = bool(flag)

    def zero_grad(self) -> None:
        for name in self.names():
            t = self._entries[name]
            if t.requires_grad:
                t.zero_grad()

    def total_size(self, trainable_only: bool = False) -> int:
        return sum(
            t.size for t in self._entries.values() if t.requires_grad or not trainable_only)

    def clone(self) -> "ParameterStore":
        out = ParameterStore()
        for name, t in self.items():
            out.add(name, t.data.copy(), trainable=t.requires_grad)
        return out

    def copy_with_prefix(self, src_prefix: str, dst_prefix: str, into: "ParameterStore",
                         trainable: bool) -> list[str]:
        """Bit-exact copy of every `src_prefix`-named entry under a new prefix."""
        copied = []
        for name, t in self.items():
            if name.startswith(src_prefix):
                new = dst_prefix + name[len(src_prefix):]
                into.add(new, t.data.copy(), trainable=trainable)
                copied.append(new)
        return copied
