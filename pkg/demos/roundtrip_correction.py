"""Why the associated transform needs its correction term.

For k >= 2 the associated Weber-Orr kernel is not complete: the inverse
of the forward transform misses the component along r^-k.  This script
shows the raw inversion error, the size of the correction, and the error
once it is added back.
"""

from __future__ import annotations

import logging

from weberorr import TransformParams, roundtrip
from weberorr.fixtures import acceptance_profile

logging.basicConfig(level=logging.WARNING)


def main() -> None:
    f = acceptance_profile(1.0)
    params = TransformParams.default(1.0)
    print(f"{'k':>3} {'moment':>24} {'raw error':>10} {'corrected':>10} {'cutoff':>8}")
    for k in (0, 1, 2, 3):
        rep = roundtrip(k, f, params)
        print(f"{k:>3} {rep.moment:>24.6g} {rep.raw_error:>10.2e} {rep.error:>10.2e} {rep.cutoff:>8.1f}")


if __name__ == "__main__":
    main()
