"""Equivariant first-order deformations of stable curves in characteristic p."""
