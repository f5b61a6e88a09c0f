"""
CLI commands package
====================

One module per pipeline stage; each exposes ``setup(subparsers)``.
"""
