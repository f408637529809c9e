#!/usr/bin/env python3
"""Replay golden vectors against the generated Verilog through Yosys CXXRTL.

    tools/cxxrtl_check.py OUT_DIR [--yosys yowasp-yosys] [--cxx c++]

OUT_DIR is a `seqsvm run` (or `gen-hdl`) output directory. Needs a Yosys with
the CXXRTL backend (`yosys` or the `yowasp-yosys` pip package) and a C++17
compiler. Exits non-zero on any class or cycle mismatch.
"""

import argparse
import pathlib
import shutil
import subprocess
import sys
import tempfile

HARNESS = r"""
#include "design.cc"
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

static std::vector<std::vector<long>> rows(const char* path)
{
    std::ifstream in(path);
    std::vector<std::vector<long>> out;
    for (std::string line; std::getline(in, line);) {
        if (line.empty() || line[0] == '#')
            continue;
        std::istringstream ss(line);
        std::vector<long> r;
        for (long v; ss >> v;)
            r.push_back(v);
        out.push_back(r);
    }
    return out;
}

int main(int argc, char** argv)
{
    const auto stim = rows(argv[1]);
    const auto expect = rows(argv[2]);
    cxxrtl_design::TOP top;
    // outputs settle on the eval after a clock edge, so sample after the falling edge
    auto tick = [&] {
        top.p_clk.set<bool>(true);
        top.step();
        top.p_clk.set<bool>(false);
        top.step();
    };
    top.step();
    top.p_rst.set<bool>(true);
    tick();
    top.p_rst.set<bool>(false);
    int errors = 0;
    for (size_t k = 0; k < stim.size(); ++k) {
        const auto& s = stim[k];
        const size_t m = s.size() - 2;
        for (auto& chunk : top.p_x__flat.data)
            chunk = 0;
        for (size_t j = 0; j < m; ++j)
            for (int b = 0; b < IN_W; ++b)
                if ((s[1 + j] >> b) & 1) {
                    const size_t bit = j * IN_W + b;
                    top.p_x__flat.data[bit / 32] |= 1u << (bit % 32);
                }
        top.p_start.set<bool>(true);
        tick();
        top.p_start.set<bool>(false);
        long cycles = 0;
        while (top.p_busy.get<bool>() && cycles < 1000000) {
            tick();
            ++cycles;
        }
        const long cls = top.p_class__out.get<long>();
        if (cls != expect[k][1] || cycles != s.back() || cycles != expect[k][3]) {
            ++errors;
            std::printf("MISMATCH %ld: class %ld (expected %ld), cycles %ld (expected %ld)\n", s[0], cls,
                        expect[k][1], cycles, s.back());
        }
    }
    std::printf("%zu vectors, %d errors\n", stim.size(), errors);
    return errors == 0 ? 0 : 1;
}
"""


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out_dir", type=pathlib.Path)
    ap.add_argument("--yosys", default=shutil.which("yosys") and "yosys" or "yowasp-yosys")
    ap.add_argument("--cxx", default="c++")
    args = ap.parse_args()

    hdl = args.out_dir / "hdl"
    tops = sorted(hdl.glob("*_top.v"))
    if len(tops) != 1:
        sys.exit(f"expected one *_top.v in {hdl}")
    name = tops[0].name[: -len("_top.v")]
    text = tops[0].read_text()
    in_w = int(text.split("parameter IN_W = ")[1].split(",")[0])
    mangled = "p_" + (name + "_top").replace("_", "__")

    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        for f in (f"{name}_storage.v", f"{name}_top.v"):
            shutil.copy(hdl / f, tmp / f)
        script = (f"read_verilog {name}_storage.v {name}_top.v; hierarchy -top {name}_top; "
                  "proc; check -assert; flatten; write_cxxrtl design.cc")
        subprocess.run([args.yosys, "-q", "-p", script], cwd=tmp, check=True)
        include = None
        probe = subprocess.run([args.yosys + "-config", "--datdir"], capture_output=True, text=True) \
            if shutil.which(args.yosys + "-config") else None
        if probe and probe.returncode == 0:
            include = pathlib.Path(probe.stdout.strip()) / "include" / "backends" / "cxxrtl" / "runtime"
        else:
            import yowasp_yosys  # noqa: F401 (pip package layout)
            include = pathlib.Path(yowasp_yosys.__file__).parent / "share" / "include" / "backends" / "cxxrtl" / "runtime"
        (tmp / "harness.cc").write_text(HARNESS.replace("TOP", mangled).replace("IN_W", str(in_w)))
        subprocess.run([args.cxx, "-std=c++17", "-O1", "-I", str(include), "-I", str(tmp), "harness.cc", "-o", "sim"],
                       cwd=tmp, check=True)
        r = subprocess.run([str(tmp / "sim"), str(args.out_dir / "vectors.stim"),
                            str(args.out_dir / "vectors.expect")])
        sys.exit(r.returncode)


if __name__ == "__main__":
    main()
