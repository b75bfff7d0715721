# -*- coding: utf-8 -*-
# This source code is licensed under the MIT license.
