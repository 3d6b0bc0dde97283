"""Computational toolkit for free groups, ping-pong, growth, expanders,
p-adic numbers, the Bruhat-Tits tree and projective dynamics."""

__version__ = "0.1.0"
