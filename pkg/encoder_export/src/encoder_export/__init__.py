"""Offline embedding export: frozen image encoder -> WEMB v1 files.

This tool sits upstream of the classification-head trainer and talks to it
only through the WEMB v1 file format.
"""

__version__ = "0.1.0"
