"""dcasim: immune-inspired anomaly detection with a 2D robot testbed.

The cell engine (``dcasim.engine``) is a standalone anomaly detector fed
by three bounded signals and integer antigen; the simulator
(``dcasim.world``), transducers (``dcasim.signals``), and location codec
(``dcasim.antigen``) reproduce a wandering-robot classification
experiment on top of it, with ground truth and error reporting in
``dcasim.metrics`` and orchestration in ``dcasim.experiment``.
"""

from dcasim._kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
