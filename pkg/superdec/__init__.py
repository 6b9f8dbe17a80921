"""
superdec - selectively suppressed perfect-reconstruction decoders.

A small numpy autodiff stack, an orthonormal Haar filter bank, the SUPER
decoder block with its baseline counterpart, verification tools for the
reconstruction and norm-bound claims, and a desk-scale experiment harness.
"""

__version__ = "1.0.0"
