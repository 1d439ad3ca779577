"""Joint SBS ON-OFF switching and user association for energy-efficient
massive-MIMO HetNets."""

__version__ = "0.1.0"
