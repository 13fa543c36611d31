#pragma once

#include "tpnn/codegen.hpp"
#include "tpnn/model_ir.hpp"

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tpnn {

// ---------------------------------------------------------------------------
// Predictability lint
//
//   R0  file does not parse in the restricted C grammar (includes
//       function-like or non-integer #define)
//   R1  call to a dynamic allocation function
//   R2  recursion in the call graph
//   R3  for-loop without literal bounds, or induction variable written
//       in the body
//   R4  while, do/while or goto
//   R5  function pointers (declared, cast to, called through, or taken)
//   R6  call to a function not defined in the unit
//   R7  array with a non-constant dimension

struct LintFinding {
    std::string rule;
    std::string file;
    int line = 0;
    std::string message;

    bool operator==(const LintFinding&) const = default;
};

struct LintReport {
    std::vector<LintFinding> findings;

    bool passed() const { return findings.empty(); }
};

/// Lints the files of one unit together (calls may cross files). The
/// files are parsed in order, so typedefs must precede their uses.
LintReport lint(std::span<const EmittedFile> files);
LintReport lint(const EmittedUnit& unit);

/// One line per finding ("R4 net.c:17: ..."), then a verdict line.
std::string to_text(const LintReport& report);

/// Multiply-accumulate statements in the emitted source, each weighted by
/// the trip counts of its enclosing loops and by how often its function is
/// reached from <prefix>_run. A MAC statement assigns to `acc` from an
/// expression containing tp_fx_mul or `*` outside subscripts.
/// Throws std::invalid_argument when a loop has no static trip count.
std::uint64_t count_emitted_macs(const EmittedUnit& unit);

// ---------------------------------------------------------------------------
// Cost model

struct CostWeights {
    std::uint64_t mac = 2;
    std::uint64_t activation = 4;
    std::uint64_t load = 1;
    std::uint64_t store = 1;
};

struct OpCounts {
    std::uint64_t macs = 0;
    std::uint64_t activation_evals = 0;
    std::uint64_t loads = 0;
    std::uint64_t stores = 0;

    OpCounts& operator+=(const OpCounts& o);
    bool operator==(const OpCounts&) const = default;
};

struct LayerCost {
    LayerKind kind{};
    OpCounts counts;
};

struct CostReport {
    std::vector<LayerCost> layers;
    OpCounts totals;
    CostWeights weights;
    std::uint64_t cycles = 0;
};

std::uint64_t cycle_estimate(const OpCounts& counts, const CostWeights& weights);

/// Per-invocation counts; a function of the architecture only.
CostReport cost_model(const Network& network, const CostWeights& weights = {});

struct OpDeltas {
    std::int64_t macs = 0;
    std::int64_t activation_evals = 0;
    std::int64_t loads = 0;
    std::int64_t stores = 0;

    bool zero() const { return macs == 0 && activation_evals == 0 && loads == 0 && stores == 0; }
};

/// b - a, field by field. Per-layer deltas cover the common prefix of
/// layers; ordering compares total cycle estimates.
struct CostComparison {
    std::strong_ordering ordering = std::strong_ordering::equal;
    OpDeltas totals;
    std::int64_t cycles = 0;
    std::vector<OpDeltas> layers;
};

CostComparison compare_costs(const CostReport& a, const CostReport& b);

/// Aligned table with a header, one row per layer, a total row and the
/// cycle estimate with its weights.
std::string to_text(const CostReport& report);

/// Tab-separated: header line, one row per layer, a "total" row, then a
/// "cycles" row.
std::string to_tsv(const CostReport& report);

} // namespace tpnn
