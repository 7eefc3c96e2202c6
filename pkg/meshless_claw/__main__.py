# SPDX-FileCopyrightText: 2024 Contributors to the meshless_claw project
#
# SPDX-License-Identifier: MPL-2.0
from meshless_claw.cli import main

if __name__ == "__main__":
    main()
