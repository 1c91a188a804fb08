"""Kernel expression trees: base kernels combined by sums and products."""

from __future__ import annotations

from dataclasses import dataclass

from gpmem.core.errors import ConfigError
from gpmem.kernels.base import BaseKernelKind
from gpmem.kernels.registry import get_formula


@dataclass(frozen=True)
class Base:
    """Leaf node: one base kernel bound to named hyperparameters."""

    kind: BaseKernelKind
    params: tuple[str, ...]

    def __post_init__(self) -> None:
        """Normalise the kind and check parameter arity."""
        object.__setattr__(self, "kind", BaseKernelKind(self.kind))
        object.__setattr__(self, "params", tuple(self.params))
        roles = get_formula(self.kind).meta.roles
        if len(self.params) != len(roles):
            raise ConfigError(
                f"{self.kind} takes {len(roles)} parameter(s) {roles}, got {self.params}"
            )

    def __add__(self, other: KernelExpr) -> Sum:
        return Sum(self, other)

    def __mul__(self, other: KernelExpr) -> Product:
        return Product(self, other)

    def __str__(self) -> str:
        return f"{self.kind.value}({','.join(self.params)})"


@dataclass(frozen=True)
class Sum:
    """k = left + right (a global interaction of two components)."""

    left: KernelExpr
    right: KernelExpr

    def __add__(self, other: KernelExpr) -> Sum:
        return Sum(self, other)

    def __mul__(self, other: KernelExpr) -> Product:
        return Product(self, other)

    def __str__(self) -> str:
        return f"{self.left} + {self.right}"


@dataclass(frozen=True)
class Product:
    """k = left × right (a local interaction of two components)."""

    left: KernelExpr
    right: KernelExpr

    def __add__(self, other: KernelExpr) -> Sum:
        return Sum(self, other)

    def __mul__(self, other: KernelExpr) -> Product:
        return Product(self, other)

    def __str__(self) -> str:
        def wrap(e: KernelExpr) -> str:
            return f"({e})" if isinstance(e, Sum) else str(e)

        return f"{wrap(self.left)} * {wrap(self.right)}"


KernelExpr = Base | Sum | Product


def add_funcs(a: KernelExpr, b: KernelExpr) -> KernelExpr:
    """Sum of two covariance functions."""
    return Sum(a, b)


def mult_funcs(a: KernelExpr, b: KernelExpr) -> KernelExpr:
    """Product of two covariance functions."""
    return Product(a, b)


def leaves(expr: KernelExpr) -> list[Base]:
    """Base leaves, left to right."""
    if isinstance(expr, Base):
        return [expr]
    return leaves(expr.left) + leaves(expr.right)


def params_of(expr: KernelExpr) -> list[str]:
    """Parameter names referenced by ``expr``, first occurrence order."""
    seen: dict[str, None] = {}
    for leaf in leaves(expr):
        for name in leaf.params:
            seen.setdefault(name, None)
    return list(seen)


def format_kernel(expr: KernelExpr) -> str:
    """Text form, e.g. ``LIN(s1) + SE(s5,l5) * PER(s2,p,l2)``."""
    return str(expr)
