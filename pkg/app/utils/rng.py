"""Seeded random streams.

Every consumer of randomness gets its own generator so that, for example,
mobility stays the same when traffic or error draws change.
"""

from typing import List

from numpy.random import SFC64, Generator, SeedSequence


def make_stream(seed: int) -> Generator:
    """A single generator seeded directly from an integer."""
    return Generator(SFC64(SeedSequence(seed)))


def spawn_streams(seed: int, n: int) -> List[Generator]:
    """
    Spawn n independent generators from one run seed.

    Generators are independent as long as fewer than 2^64 are spawned and
    fewer than 2^64 variates are pulled from each.
    """
    return [Generator(SFC64(child)) for child in SeedSequence(seed).spawn(n)]
