# -*- coding: utf-8 -*-
# This source code is licensed under the MIT license.

"""Entry point for python -m photodetection."""

import sys

from photodetection.cli import main

if __name__ == "__main__":
    sys.exit(main())
