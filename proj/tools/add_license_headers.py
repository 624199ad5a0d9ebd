#!/usr/bin/env python3
# Copyright 2026 The id-kit Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Prepend the Apache-2.0 header to project sources. Idempotent."""

import pathlib
import sys

LINES = [
    "Copyright 2026 The id-kit Authors",
    "",
    'Licensed under the Apache License, Version 2.0 (the "License");',
    "you may not use this file except in compliance with the License.",
    "You may obtain a copy of the License at",
    "",
    "    http://www.apache.org/licenses/LICENSE-2.0",
    "",
    "Unless required by applicable law or agreed to in writing, software",
    'distributed under the License is distributed on an "AS IS" BASIS,',
    "WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.",
    "See the License for the specific language governing permissions and",
    "limitations under the License.",
]

DIRS = ["src", "include", "tests", "tools", "bench"]
CXX = {".cpp", ".hpp", ".h", ".cc"}


def header(prefix):
    return "".join((prefix + " " + l).rstrip() + "\n" for l in LINES) + "\n"


def apply(path, prefix):
    text = path.read_text()
    if header(prefix).splitlines()[0] in text.splitlines()[:2]:
        return False
    shebang = ""
    if text.startswith("#!"):
        shebang, _, text = text.partition("\n")
        shebang += "\n"
    path.write_text(shebang + header(prefix) + text)
    return True


def main():
    root = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else ".").resolve()
    files = [root / "CMakeLists.txt"]
    for d in DIRS:
        files += sorted(p for p in (root / d).rglob("*") if p.is_file())
    changed = 0
    for p in files:
        if "vendor" in p.relative_to(root).parts:
            continue
        if p.suffix in CXX:
            changed += apply(p, "//")
        elif p.name == "CMakeLists.txt" or p.suffix == ".py":
            changed += apply(p, "#")
    print(f"{changed} files updated")


if __name__ == "__main__":
    main()
