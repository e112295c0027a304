"""Golden angle modulation: constellations, shaping schemes, MI/SER metrics and MI optimization."""

__version__ = "0.1.0"

from .constellation import *  # noqa: F401,F403
from .constellation import __all__ as _c_all
from .metrics import *  # noqa: F401,F403
from .metrics import __all__ as _m_all
from .optimize import *  # noqa: F401,F403
from .optimize import __all__ as _o_all
from .schemes import *  # noqa: F401,F403
from .schemes import __all__ as _s_all

__all__ = ["__version__", *_c_all, *_s_all, *_m_all, *_o_all]
