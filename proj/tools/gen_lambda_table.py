#!/usr/bin/env python3
"""Regenerate src/optimized_lambda.cpp from a lambda_opt.csv.

    dodlab optimize-lambda --p 0:1:5 --out run/
    tools/gen_lambda_table.py run/lambda_opt.csv > src/optimized_lambda.cpp
"""
import csv
import sys

MAX_DEGREE = 5

TEMPLATE = """// Generated by tools/gen_lambda_table.py from `dodlab optimize-lambda` output.
#include <array>
#include <optional>

#include "dodlab/analysis.hpp"

namespace dodlab {{

namespace {{

constexpr std::array<double, kOptimizedLambdaMaxDegree + 1> kGaussLegendre = {{
{gl}}};

constexpr std::array<double, kOptimizedLambdaMaxDegree + 1> kGaussLobatto = {{
{gll}}};

}}  // namespace

std::optional<double> shipped_optimized_lambda(NodeKind kind, int p) {{
  if (p < 0 || p > kOptimizedLambdaMaxDegree) {{
    return std::nullopt;
  }}
  const double v = kind == NodeKind::GaussLegendre ? kGaussLegendre[p]
                                                   : kGaussLobatto[p];
  if (!(v > 0.0)) {{
    return std::nullopt;
  }}
  return v;
}}

}}  // namespace dodlab
"""


def column(values):
    return "".join(f"    {v},  // p = {p}\n" for p, v in enumerate(values))


def main():
    table = {"gl": [0.0] * (MAX_DEGREE + 1), "gll": [0.0] * (MAX_DEGREE + 1)}
    with open(sys.argv[1], newline="") as f:
        for row in csv.DictReader(f):
            p = int(row["p"])
            if 0 <= p <= MAX_DEGREE:
                table[row["kind"]][p] = float(row["lambda_star"])
    sys.stdout.write(TEMPLATE.format(gl=column(table["gl"]),
                                     gll=column(table["gll"])))


if __name__ == "__main__":
    main()
