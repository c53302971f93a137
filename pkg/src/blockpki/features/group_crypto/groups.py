"""Prime-order groups behind one multiplicative interface.

The signature scheme is written in multiplicative notation (g^x, N1·N2), so
both groups expose ``exp``/``mul``/``inverse``. For the elliptic-curve group
these map onto scalar multiplication and point addition.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from functools import lru_cache
from typing import Any

from ecdsa import SECP256k1
from ecdsa.ellipticcurve import INFINITY, PointJacobi
from ecdsa.errors import MalformedPointError

from ...exceptions import InvalidGroupElement


class PrimeOrderGroup(ABC):
    """Cyclic group of prime order ``order`` generated by ``generator``."""

    name: str
    order: int
    element_size: int
    scalar_size: int

    @property
    @abstractmethod
    def generator(self) -> Any: ...

    @property
    @abstractmethod
    def identity(self) -> Any: ...

    @abstractmethod
    def mul(self, a: Any, b: Any) -> Any: ...

    @abstractmethod
    def exp(self, base: Any, k: int) -> Any: ...

    @abstractmethod
    def inverse(self, a: Any) -> Any: ...

    @abstractmethod
    def encode(self, a: Any) -> bytes: ...

    @abstractmethod
    def decode(self, data: bytes) -> Any: ...

    def base_exp(self, k: int) -> Any:
        return self.exp(self.generator, k)

    def eq(self, a: Any, b: Any) -> bool:
        return self.encode(a) == self.encode(b)

    def is_identity(self, a: Any) -> bool:
        return self.eq(a, self.identity)

    def encode_scalar(self, k: int) -> bytes:
        return (k % self.order).to_bytes(self.scalar_size, "big")

    def scalar_hex(self, k: int) -> str:
        return self.encode_scalar(k).hex()

    def element_hex(self, a: Any) -> str:
        return self.encode(a).hex()

    def element_from_hex(self, value: str) -> Any:
        try:
            raw = bytes.fromhex(value)
        except ValueError as e:
            raise InvalidGroupElement(f"Element is not hex: {e}") from e
        return self.decode(raw)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(order={self.order})"


class TinyGroup(PrimeOrderGroup):
    """Order-11 subgroup of Z_23^* generated by 2; small enough to brute-force."""

    name = "tiny"
    element_size = 2
    scalar_size = 2

    def __init__(self, p: int = 23, q: int = 11, g: int = 2):
        if pow(g, q, p) != 1 or g % p == 1:
            raise ValueError(f"g={g} does not have order {q} mod {p}")
        self.p = p
        self.order = q
        self._g = g

    @property
    def generator(self) -> int:
        return self._g

    @property
    def identity(self) -> int:
        return 1

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.p

    def exp(self, base: int, k: int) -> int:
        return pow(base, k % self.order, self.p)

    def inverse(self, a: int) -> int:
        return pow(a, -1, self.p)

    def encode(self, a: int) -> bytes:
        return int(a).to_bytes(self.element_size, "big")

    def decode(self, data: bytes) -> int:
        if len(data) != self.element_size:
            raise InvalidGroupElement(f"Expected {self.element_size} bytes, got {len(data)}")
        value = int.from_bytes(data, "big")
        # membership: element of the order-q subgroup
        if not 0 < value < self.p or pow(value, self.order, self.p) != 1:
            raise InvalidGroupElement(f"{value} is not in the order-{self.order} subgroup")
        return value

    def elements(self) -> list[int]:
        return [self.exp(self._g, k) for k in range(self.order)]


class Secp256k1Group(PrimeOrderGroup):
    """secp256k1 points; identity is the point at infinity."""

    name = "secp256k1"
    element_size = 33  # SEC1 compressed
    scalar_size = 32

    def __init__(self):
        self._curve = SECP256k1.curve
        self._generator = SECP256k1.generator
        self.order = SECP256k1.order

    @property
    def generator(self) -> Any:
        return self._generator

    @property
    def identity(self) -> Any:
        return INFINITY

    def is_identity(self, a: Any) -> bool:
        return a is INFINITY or a == INFINITY

    def mul(self, a: Any, b: Any) -> Any:
        if self.is_identity(a):
            return b
        if self.is_identity(b):
            return a
        return a + b

    def exp(self, base: Any, k: int) -> Any:
        k %= self.order
        if k == 0 or self.is_identity(base):
            return INFINITY
        return base * k

    def inverse(self, a: Any) -> Any:
        if self.is_identity(a):
            return INFINITY
        return -a

    def encode(self, a: Any) -> bytes:
        if self.is_identity(a):
            return bytes(self.element_size)
        return a.to_bytes("compressed")

    def decode(self, data: bytes) -> Any:
        if len(data) != self.element_size:
            raise InvalidGroupElement(f"Expected {self.element_size} bytes, got {len(data)}")
        if data == bytes(self.element_size):
            return INFINITY
        try:
            return PointJacobi.from_bytes(
                self._curve,
                data,
                valid_encodings=("compressed",),
                order=self.order,
            )
        except (MalformedPointError, AssertionError, ValueError) as e:
            raise InvalidGroupElement(f"Not a secp256k1 point: {e}") from e


@lru_cache()
def get_group(name: str) -> PrimeOrderGroup:
    if name == TinyGroup.name:
        return TinyGroup()
    if name == Secp256k1Group.name:
        return Secp256k1Group()
    raise ValueError(f"Unknown group '{name}'")
