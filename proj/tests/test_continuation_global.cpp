// Whole-branch runs on the f = 1.6, d = 0.1 hat-mode diagram. Slow: every switchable
// candidate is continued until it returns to the trivial curve.

#include "doctest.h"

#include "llcomb/continuation.hpp"

#include <utility>

using namespace llcomb;

namespace {

constexpr double kF = 1.6;
constexpr double kD = 0.1;

struct Run {
    BifurcationCandidate start;
    Branch branch;
};

const std::vector<Run>& all_branches() {
    static const std::vector<Run> runs = [] {
        std::vector<Run> out;
        const Parameters p{kD, 0.0, kF};
        for (const auto& c : enumerate_bifpoints_hat(kF, kD)) {
            if (!c.switchable()) continue;
            out.push_back({c, continue_branch(branch_switch(c, kD), p, Mode::hat)});
        }
        return out;
    }();
    return runs;
}

const Run& run_for(int k, int sigma, double param) {
    for (const auto& r : all_branches())
        if (r.start.k == k && r.start.sigma == sigma && std::abs(r.start.param - param) < 1e-3) return r;
    FAIL("branch not started");
    return all_branches().front();
}

} // namespace

TEST_CASE("every switchable candidate at f=1.6, d=0.1 returns to the trivial curve") {
    const auto& runs = all_branches();
    CHECK(runs.size() == 14);
    for (const auto& r : runs) {
        CAPTURE(r.start.k);
        CAPTURE(r.start.sigma);
        CAPTURE(r.start.param);
        const auto* ret = r.branch.find_event(EventKind::trivial_return);
        REQUIRE(ret != nullptr);
        CHECK(ret->index == static_cast<int>(r.branch.points.size()) - 1);
        CHECK(ret->candidate.has_value());
        CHECK(ret->distance < ContinuationConfig{}.trivial_return_tol);
    }
}

TEST_CASE("branches without multiples inside the counting bound return at the same k") {
    for (const auto& r : all_branches()) {
        if (r.start.k < 4) continue;
        CAPTURE(r.start.k);
        CAPTURE(r.start.param);
        const auto* ret = r.branch.find_event(EventKind::trivial_return);
        REQUIRE(ret != nullptr);
        REQUIRE(ret->candidate.has_value());
        CHECK(ret->candidate->k == r.start.k);
        // the other enumerated root of the same k, not the starting one
        CHECK(std::abs(ret->param - r.start.param) > 1e-2);
    }
}

TEST_CASE("stored points re-validate on every branch") {
    for (const auto& r : all_branches()) {
        CAPTURE(r.start.k);
        CAPTURE(r.start.param);
        int bad_residual = 0, bad_theory = 0;
        for (const auto& q : r.branch.points) {
            const Parameters P{kD, q.param, kF};
            if (residual(q.state, P).lpNorm<Eigen::Infinity>() >= 1e-9) ++bad_residual;
            if (is_nonconstant(q.state) && !validate_solution(q.state, P).theory_ok(P.d, P.zeta)) ++bad_theory;
        }
        CHECK(bad_residual == 0);
        CHECK(bad_theory == 0);
    }
}

TEST_CASE("bright 1-soliton at the fold of the k=1 branch is far from constants") {
    const Run& r = run_for(1, -1, 2.24888);
    const auto folds = r.branch.events_of(EventKind::turning_point);
    const BranchEvent* soliton = nullptr;
    // first fold near 3.15568 along the branch; later folds at the same value carry two peaks
    for (const auto* e : folds)
        if (!soliton && std::abs(e->param - 3.15568) < 1e-3) soliton = e;
    REQUIRE(soliton != nullptr);
    REQUIRE(soliton->state.has_value());
    const Parameters P{kD, soliton->param, kF};
    CHECK(residual(*soliton->state, P).lpNorm<Eigen::Infinity>() < 1e-9);
    CHECK(count_maxima_abs(*soliton->state) == 1);
    // measured 1.18497 at n = 256; regression floor
    CHECK(distance_to_trivial(*soliton->state, P, Mode::hat).first > 0.1);
}

TEST_CASE("manual switch at a secondary candidate leaves the parent branch") {
    const Run* parent = nullptr;
    const BranchEvent* sec = nullptr;
    for (const auto& r : all_branches()) {
        if (auto* e = r.branch.find_event(EventKind::secondary_bif_candidate)) {
            parent = &r;
            sec = e;
            break;
        }
    }
    REQUIRE(sec != nullptr);
    const BranchPoint& at = parent->branch.points[sec->index];
    const BranchPoint sw = switch_at(parent->branch, sec->index);
    const Parameters P{kD, sw.param, kF};
    CHECK(residual(sw.state, P).lpNorm<Eigen::Infinity>() < 1e-9);
    CHECK(is_nonconstant(sw.state));
    const FieldState diff(at.state.grid, sw.state.u - at.state.u);
    CHECK(l2norm(diff) > 0.0);

    ContinuationConfig cfg;
    cfg.max_steps = 5;
    const Branch b = continue_branch(sw, {kD, 0.0, kF}, Mode::hat, cfg);
    CHECK(b.points.size() >= 2);
}
