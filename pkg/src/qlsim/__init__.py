"""Desk-scale simulator and analysis toolkit for two-species trapped-ion
quantum-logic spectroscopy: crystal mechanics, master-equation pulse dynamics,
the six-step readout protocol, and the metrology pipeline from phase scans to
a corrected absolute frequency with error budget."""

__version__ = "0.1.0"
