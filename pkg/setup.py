#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# ------------------------------------------------------------------------------
#
#   Copyright 2023-2026 Valory AG
#
#   Licensed under the Apache License, Version 2.0 (the "License");
#   you may not use this file except in compliance with the License.
#   You may obtain a copy of the License at
#
#       http://www.apache.org/licenses/LICENSE-2.0
#
#   Unless required by applicable law or agreed to in writing, software
#   distributed under the License is distributed on an "AS IS" BASIS,
#   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#   See the License for the specific language governing permissions and
#   limitations under the License.
#
# ------------------------------------------------------------------------------

from setuptools import find_packages, setup


if __name__ == "__main__":
    setup(
        name="twomode-metrology",
        version="0.1.0",
        description="Phase-sensitivity bounds for two-mode interferometers with fluctuating particle number.",
        license="Apache-2.0",
        python_requires=">=3.8",
        packages=find_packages(include=["twomode_metrology", "twomode_metrology.*"]),
        package_data={"twomode_metrology": ["defaults.yaml", "README.md"]},
        install_requires=[
            "open-aea>=1.42.0,<2.0.0",
            "click>=8.1.0,<9",
            "numpy>=1.22",
            "scipy>=1.8",
        ],
        extras_require={"test": ["pytest>=7.2.1,<8"]},
        entry_points={
            "console_scripts": ["twomode=twomode_metrology.cli:main"],
        },
    )
