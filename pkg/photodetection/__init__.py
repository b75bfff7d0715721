# -*- coding: utf-8 -*-
# This source code is licensed under the MIT license.

"""Continuous photodetection model with detector non-idealities for the SD and E quantum jump superoperators."""
