"""sealprint: one-machine hybrid fabrication jobs for consumer FDM printers.

Compiles 2D heat-sealing patterns into nozzle toolpaths, merges them with
third-party-sliced print G-code (pause + alert between phases, bed-temp
ceiling, alignment-marker recovery), and plans heat-activated bending strips
and friction dot textures.
"""

__version__ = "0.1.0"
