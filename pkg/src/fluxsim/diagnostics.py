"""Lightweight counters used to verify cache behavior."""

_eigensolves = 0


def count_eigensolve():
    global _eigensolves
    _eigensolves += 1


def eigensolve_count():
    return _eigensolves


def reset_eigensolve_count():
    global _eigensolves
    _eigensolves = 0
