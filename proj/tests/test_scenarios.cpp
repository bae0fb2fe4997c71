#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "iqsim/scenarios.hpp"
#include "support/generators.hpp"

using namespace iqsim;
using namespace iqsim::scenarios;
using iqsim::testing::Rng;

namespace {

const Complex kI{0.0, 1.0};
const double kH = std::sqrt(0.5);
const double kPi = std::acos(-1.0);

Complex amp(const TraceStage& s, std::size_t i) {
  return s.state.amplitudes()[i];
}

}  // namespace

TEST_CASE("balanced interferometer sends everything to one port") {
  StageTrace t = run_bmzi({kH, kH, 0.0});
  REQUIRE(t.stages.size() == 4);
  CHECK(t.stages[0].label == "initial");
  CHECK(t.stages[1].label == "after_BBS1");
  CHECK(t.stages[2].label == "after_M_PS");
  CHECK(t.stages[3].label == "after_BBS2");

  CHECK(std::abs(amp(t.stages[1], 0) - Complex{kH, 0.0}) < 1e-14);
  CHECK(std::abs(amp(t.stages[1], 1) - kI * kH) < 1e-14);
  // Mirror then zero phase: (-R, i T).
  CHECK(std::abs(amp(t.stages[2], 0) - Complex{-kH, 0.0}) < 1e-14);
  CHECK(std::abs(amp(t.stages[2], 1) - kI * kH) < 1e-14);
  CHECK(std::abs(amp(t.stages[3], 0) - Complex{-1.0, 0.0}) < 1e-14);

  CHECK(t.survival == 1.0);
  CHECK(t.detectors.at("D0") == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(t.detectors.at("D1") == doctest::Approx(0.0).epsilon(1e-13));
  CHECK_FALSE(t.conditional_detectors.has_value());
  CHECK(t.sweep_visibilities.at("D0") == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t.sweep_visibilities.at("D1") == doctest::Approx(1.0).epsilon(1e-12));

  const MeasureReport& interior = t.stages[2].report;
  CHECK(interior.budget.coherence == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(interior.budget.predictability ==
        doctest::Approx(0.0).epsilon(1e-13));
  REQUIRE(interior.gy_visibility.has_value());
  CHECK(*interior.gy_visibility == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(*interior.gy_predictability == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(*interior.gy_relation_value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(*interior.gy_satisfied);
  CHECK(interior.basis_label == "path");

  CHECK(check_bmzi({kH, kH, 0.0}, t).empty());
}

TEST_CASE("biased interferometer matches its closed-form laws") {
  double t1 = 0.8, t2 = 0.6, phi = 0.9;
  double r1 = 0.6, r2 = 0.8;
  StageTrace t = run_bmzi({t1, t2, phi});

  double cross = 2.0 * t1 * r1 * t2 * r2 * std::cos(phi);
  double d0 = t1 * t1 * r2 * r2 + r1 * r1 * t2 * t2 + cross;
  double d1 = t1 * t1 * t2 * t2 + r1 * r1 * r2 * r2 - cross;
  CHECK(t.detectors.at("D0") == doctest::Approx(d0).epsilon(1e-12));
  CHECK(t.detectors.at("D1") == doctest::Approx(d1).epsilon(1e-12));

  const ComplementarityBudget& b = t.stages[2].report.budget;
  CHECK(b.coherence == doctest::Approx(0.96).epsilon(1e-12));
  CHECK(b.predictability == doctest::Approx(0.04).epsilon(1e-12));
  CHECK(b.coherence + b.predictability + b.residual ==
        doctest::Approx(1.0).epsilon(1e-12));

  CHECK(t.sweep_visibilities.at("D0") ==
        doctest::Approx(gy_visibility_analytic_bmzi(t1, t2, 0))
            .epsilon(1e-9));
  CHECK(t.sweep_visibilities.at("D1") ==
        doctest::Approx(gy_visibility_analytic_bmzi(t1, t2, 1))
            .epsilon(1e-9));

  CHECK(check_bmzi({t1, t2, phi}, t).empty());
}

TEST_CASE("interferometer laws hold across random settings") {
  Rng rng(51);
  for (int it = 0; it < 20; ++it) {
    BmziConfig cfg{iqsim::testing::uniform(rng, 0.0, 1.0),
                   iqsim::testing::uniform(rng, 0.0, 1.0),
                   iqsim::testing::uniform(rng, 0.0, 2.0 * kPi)};
    StageTrace t = run_bmzi(cfg);
    double r1 = std::sqrt(1.0 - cfg.t1 * cfg.t1);
    double r2 = std::sqrt(1.0 - cfg.t2 * cfg.t2);
    double cross = 2.0 * cfg.t1 * r1 * cfg.t2 * r2 * std::cos(cfg.phi);
    double d0 = cfg.t1 * cfg.t1 * r2 * r2 + r1 * r1 * cfg.t2 * cfg.t2 + cross;
    CHECK(t.detectors.at("D0") == doctest::Approx(d0).epsilon(1e-12));
    CHECK(t.detectors.at("D0") + t.detectors.at("D1") ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(check_bmzi(cfg, t).empty());
  }
}

TEST_CASE("interferometer configuration validation") {
  CHECK_THROWS_AS(run_bmzi({1.2, kH, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(run_bmzi({kH, -0.1, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(run_bmzi({kH, kH, std::nan("")}), std::invalid_argument);
}

TEST_CASE("wave-particle relation is violated at matched bias") {
  // t1 = t2 = 0.8: unit visibility with nonzero predictability.
  StageTrace t = run_bmzi({0.8, 0.8, 0.0});
  const MeasureReport& r = t.stages[2].report;
  REQUIRE(r.gy_relation_value.has_value());
  CHECK(*r.gy_visibility == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(*r.gy_predictability == doctest::Approx(0.28).epsilon(1e-12));
  CHECK(*r.gy_relation_value == doctest::Approx(1.0784).epsilon(1e-11));
  CHECK_FALSE(*r.gy_satisfied);
  // The l1 budget keeps its identity at the same settings.
  CHECK(r.budget.coherence == doctest::Approx(0.96).epsilon(1e-12));
  CHECK(r.budget.residual_raw >= -1e-10);
  CHECK(check_bmzi({0.8, 0.8, 0.0}, t).empty());
}

TEST_CASE("delayed choice with the second splitter present") {
  WdceConfig cfg{0.8, true, 0.4};
  StageTrace wdce = run_wdce(cfg);
  StageTrace bmzi = run_bmzi({0.8, balanced_transmission(), 0.4});
  REQUIRE(wdce.stages.size() == bmzi.stages.size());
  for (std::size_t i = 0; i < wdce.stages.size(); ++i) {
    CHECK(wdce.stages[i].label == bmzi.stages[i].label);
    const ComplementarityBudget& a = wdce.stages[i].report.budget;
    const ComplementarityBudget& b = bmzi.stages[i].report.budget;
    CHECK(a.coherence == b.coherence);
    CHECK(a.predictability == b.predictability);
    CHECK(a.residual == b.residual);
  }
  CHECK(wdce.detectors.at("D0") == bmzi.detectors.at("D0"));
  CHECK(check_wdce(cfg, wdce).empty());
}

TEST_CASE("delayed choice with the second splitter removed") {
  WdceConfig cfg{0.8, false, 0.4};
  StageTrace t = run_wdce(cfg);
  // No recombination: the counts just read out the arm weights.
  CHECK(t.detectors.at("D0") == doctest::Approx(0.36).epsilon(1e-13));
  CHECK(t.detectors.at("D1") == doctest::Approx(0.64).epsilon(1e-13));
  CHECK(t.sweep_visibilities.at("D0") == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(t.sweep_visibilities.at("D1") == doctest::Approx(0.0).epsilon(1e-12));

  // The interior budget is untouched by the later choice.
  StageTrace present = run_wdce({0.8, true, 0.4});
  const ComplementarityBudget& a = t.stages[2].report.budget;
  const ComplementarityBudget& b = present.stages[2].report.budget;
  CHECK(a.coherence == b.coherence);
  CHECK(a.predictability == b.predictability);
  CHECK(a.residual == b.residual);
  CHECK(a.coherence == doctest::Approx(0.96).epsilon(1e-12));

  CHECK(check_wdce(cfg, t).empty());
}

TEST_CASE("eraser stages walk the coherence between subsystems") {
  PqeConfig cfg{true, 0.0};
  StageTrace t = run_pqe(cfg);
  REQUIRE(t.stages.size() == 6);
  CHECK(t.stages[0].label == "initial");
  CHECK(t.stages[1].label == "after_BS1");
  CHECK(t.stages[2].label == "after_HWP");
  CHECK(t.stages[3].label == "after_M_PS_BS2");
  CHECK(t.stages[4].label == "after_QWP");
  CHECK(t.stages[5].label == "after_PBS");

  // Marker on: the path qubit is fully entangled with polarization.
  const ComplementarityBudget& hwp = t.stages[2].report.budget;
  CHECK(hwp.coherence == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(hwp.predictability == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(*hwp.entanglement == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(std::abs(amp(t.stages[2], 0) - Complex{kH, 0.0}) < 1e-14);
  CHECK(std::abs(amp(t.stages[2], 3) - kI * kH) < 1e-14);

  // Recombined but still marked.
  const ComplementarityBudget& mid = t.stages[3].report.budget;
  CHECK(mid.coherence == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(*mid.entanglement == doctest::Approx(1.0).epsilon(1e-13));

  // Eraser on at phi = 0: C = 1/sqrt2, P = 0, E = 1 - 1/sqrt2.
  const ComplementarityBudget& qwp = t.stages[4].report.budget;
  CHECK(qwp.coherence == doctest::Approx(kH).epsilon(1e-12));
  CHECK(qwp.predictability == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(*qwp.entanglement == doctest::Approx(1.0 - kH).epsilon(1e-12));

  // Detector-basis budget after the fan-out (d = 4).
  const ComplementarityBudget& pbs = t.stages[5].report.budget;
  CHECK(pbs.d == 4);
  CHECK(pbs.coherence == doctest::Approx(kH).epsilon(1e-12));
  CHECK(pbs.predictability == doctest::Approx(2.5 - std::sqrt(2.0)).epsilon(1e-12));
  CHECK(*pbs.entanglement == doctest::Approx(0.5 + kH).epsilon(1e-12));
  CHECK(t.stages[5].report.basis_label == "detector");

  CHECK(check_pqe(cfg, t).empty());
}

TEST_CASE("eraser detector laws across the phase") {
  for (int k = 0; k <= 8; ++k) {
    double phi = 2.0 * kPi * static_cast<double>(k) / 8.0;
    StageTrace t = run_pqe({true, phi});
    CHECK(t.detectors.at("D0") ==
          doctest::Approx((1.0 + std::cos(phi)) / 4.0).epsilon(1e-12));
    CHECK(t.detectors.at("D2") ==
          doctest::Approx((1.0 - std::cos(phi)) / 4.0).epsilon(1e-12));
    CHECK(t.detectors.at("D1") == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(t.detectors.at("D3") == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(check_pqe({true, phi}, t).empty());
  }
  StageTrace t = run_pqe({true, 0.0});
  CHECK(t.sweep_visibilities.at("D0") == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t.sweep_visibilities.at("D2") == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t.sweep_visibilities.at("D1") == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(t.sweep_visibilities.at("D3") == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("marked interferometer shows no fringes without the eraser") {
  PqeConfig cfg{false, 0.7};
  StageTrace t = run_pqe(cfg);
  REQUIRE(t.stages.size() == 5);
  for (const char* d : {"D0", "D1", "D2", "D3"})
    CHECK(t.detectors.at(d) == doctest::Approx(0.25).epsilon(1e-12));
  for (const char* d : {"D0", "D1", "D2", "D3"})
    CHECK(t.sweep_visibilities.at(d) == doctest::Approx(0.0).epsilon(1e-12));

  // Without the eraser the fan-out keeps all the budget in C + E.
  const ComplementarityBudget& pbs = t.stages[4].report.budget;
  CHECK(pbs.coherence == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pbs.predictability == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(*pbs.entanglement == doctest::Approx(2.0).epsilon(1e-12));

  CHECK(check_pqe(cfg, t).empty());
}

TEST_CASE("chained interferometers without a blocker") {
  UnruhConfig cfg{UnruhBlock::kNone, 0.0};
  StageTrace t = run_unruh(cfg);
  REQUIRE(t.stages.size() == 4);
  CHECK(t.stages[1].label == "after_BS1");
  CHECK(t.stages[2].label == "after_BS2");
  CHECK(t.stages[3].label == "after_BS3");

  CHECK(std::abs(amp(t.stages[1], 0) - Complex{kH, 0.0}) < 1e-14);
  CHECK(std::abs(amp(t.stages[1], 1) - kI * kH) < 1e-14);
  CHECK(std::abs(amp(t.stages[2], 0) - Complex{-1.0, 0.0}) < 1e-14);
  CHECK(std::abs(amp(t.stages[3], 0) - Complex{kH, 0.0}) < 1e-14);
  CHECK(std::abs(amp(t.stages[3], 1) + kI * kH) < 1e-14);

  CHECK(t.survival == 1.0);
  CHECK(t.detectors.at("D0") == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(t.detectors.at("D1") == doctest::Approx(0.5).epsilon(1e-13));
  CHECK_FALSE(t.conditional_detectors.has_value());
  CHECK(t.sweep_visibilities.empty());

  CHECK(t.stages[1].report.budget.coherence ==
        doctest::Approx(1.0).epsilon(1e-13));
  CHECK(t.stages[2].report.budget.predictability ==
        doctest::Approx(1.0).epsilon(1e-13));
  CHECK(t.stages[3].report.budget.coherence ==
        doctest::Approx(1.0).epsilon(1e-13));

  CHECK(check_unruh(cfg, t).empty());
}

TEST_CASE("blocking the second arm reroutes everything to D1") {
  UnruhConfig cfg{UnruhBlock::kPath2, 0.0};
  StageTrace t = run_unruh(cfg);
  REQUIRE(t.stages.size() == 5);
  CHECK(t.stages[2].label == "after_block");

  CHECK(std::abs(amp(t.stages[2], 0) - Complex{1.0, 0.0}) < 1e-14);
  CHECK(std::abs(amp(t.stages[2], 1)) < 1e-14);
  // Recombination leaves -( |0> - i |1> )/sqrt2 inside MZI 2.
  CHECK(std::abs(amp(t.stages[3], 0) - Complex{-kH, 0.0}) < 1e-14);
  CHECK(std::abs(amp(t.stages[3], 1) - kI * kH) < 1e-14);
  CHECK(std::abs(amp(t.stages[4], 1) + kI) < 1e-14);

  CHECK(t.survival == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(t.detectors.at("D0") == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(t.detectors.at("D1") == doctest::Approx(0.5).epsilon(1e-13));
  REQUIRE(t.conditional_detectors.has_value());
  CHECK(t.conditional_detectors->at("D0") ==
        doctest::Approx(0.0).epsilon(1e-13));
  CHECK(t.conditional_detectors->at("D1") ==
        doctest::Approx(1.0).epsilon(1e-13));

  CHECK(t.stages[2].report.budget.predictability ==
        doctest::Approx(1.0).epsilon(1e-13));
  CHECK(t.stages[3].report.budget.coherence ==
        doctest::Approx(1.0).epsilon(1e-13));

  CHECK(check_unruh(cfg, t).empty());
}

TEST_CASE("blocking the first arm reroutes everything to D0") {
  UnruhConfig cfg{UnruhBlock::kPath1, 0.0};
  StageTrace t = run_unruh(cfg);
  CHECK(std::abs(amp(t.stages[2], 1) - kI) < 1e-14);
  CHECK(std::abs(amp(t.stages[4], 0) - Complex{1.0, 0.0}) < 1e-14);
  CHECK(t.detectors.at("D0") == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(t.detectors.at("D1") == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(t.conditional_detectors->at("D0") ==
        doctest::Approx(1.0).epsilon(1e-13));
  CHECK(check_unruh(cfg, t).empty());
}

TEST_CASE("chained interferometer pins its phase") {
  CHECK_THROWS_AS(run_unruh({UnruhBlock::kNone, 0.3}), std::invalid_argument);
}

TEST_CASE("trace audits catch tampering") {
  StageTrace t = run_bmzi({0.8, 0.6, 0.9});
  t.detectors["D0"] += 1e-6;
  CHECK_FALSE(check_bmzi({0.8, 0.6, 0.9}, t).empty());

  StageTrace t2 = run_bmzi({0.8, 0.6, 0.9});
  t2.stages[2].report.budget.coherence += 1e-6;
  CHECK_FALSE(check_bmzi({0.8, 0.6, 0.9}, t2).empty());

  StageTrace t3 = run_pqe({true, 0.0});
  t3.detectors["D1"] = 0.3;
  CHECK_FALSE(check_pqe({true, 0.0}, t3).empty());

  StageTrace t4 = run_unruh({UnruhBlock::kPath2, 0.0});
  t4.survival = 0.7;
  CHECK_FALSE(check_unruh({UnruhBlock::kPath2, 0.0}, t4).empty());
}
