"""Direction-shift keying link simulator and coherence analysis toolkit."""

__version__ = "0.1.0"
