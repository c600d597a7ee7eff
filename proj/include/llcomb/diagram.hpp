#pragma once

// Deterministic SVG bifurcation diagrams: active parameter against L2 norm.

#include "llcomb/continuation.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace llcomb {

struct DiagramBranch {
    std::string label;
    Branch branch;
    std::string color;  ///< empty picks from the palette by position
};

struct DiagramSpec {
    Mode mode = Mode::hat;
    Parameters params;  ///< fixes the trivial curve; the active entry is ignored
    std::vector<DiagramBranch> branches;
    bool trivial_overlay = true;
    bool mark_bifpoints = true;  ///< bifurcation points and folds of the trivial curve
    std::optional<std::pair<double, double>> param_range;  ///< default: fitted to the content
    std::string title;
};

/// Throws PreconditionError when there is nothing to draw (no branch and no overlay),
/// when a branch uses another mode, or when the range is empty.
void validate(const DiagramSpec& spec);

/// SVG document with viewBox 0 0 800 600. The trivial curve is the path with id
/// "trivial" (black, one subpath per piece inside the range); branch i is the path with
/// id "branch-i". The output depends only on the spec.
std::string render_diagram_svg(const DiagramSpec& spec);

/// Default palette for branches, cycled.
const std::vector<std::string>& diagram_palette();

} // namespace llcomb
