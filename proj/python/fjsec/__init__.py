from ._fjsec import *  # noqa: F401,F403
