#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "iqsim/elements.hpp"
#include "support/generators.hpp"

using namespace iqsim;
using iqsim::testing::Rng;

namespace {

const Complex kI{0.0, 1.0};
const double kH = std::sqrt(0.5);

ModeSpace path_space() { return ModeSpace({{"path", 2}}); }
ModeSpace path_pol() { return ModeSpace({{"path", 2}, {"pol", 2}}); }

PureState ket(std::size_t k) {
  return PureState::basis_state(path_space(), {k});
}

}  // namespace

TEST_CASE("element matrices") {
  // Biased splitter mixes with an i on the reflected amplitude.
  Matrix b = element_matrix(Element::bbs(0.6, "path"));
  CHECK(std::abs(b.at(0, 0) - Complex{0.6, 0.0}) < 1e-15);
  CHECK(std::abs(b.at(0, 1) - Complex{0.0, 0.8}) < 1e-15);
  CHECK(std::abs(b.at(1, 0) - Complex{0.0, 0.8}) < 1e-15);
  CHECK(std::abs(b.at(1, 1) - Complex{0.6, 0.0}) < 1e-15);

  Matrix bs = element_matrix(Element::bs("path"));
  CHECK(std::abs(bs.at(0, 0) - Complex{kH, 0.0}) < 1e-15);
  CHECK(std::abs(bs.at(0, 1) - kI * kH) < 1e-15);

  Matrix m = element_matrix(Element::mirror("path"));
  CHECK(std::abs(m.at(0, 1) - kI) < 1e-15);
  CHECK(std::abs(m.at(1, 0) - kI) < 1e-15);
  CHECK(std::abs(m.at(0, 0)) == 0.0);

  Matrix ps = element_matrix(Element::phase_shifter(0.5, "path"));
  CHECK(std::abs(ps.at(0, 0) - Complex{1.0, 0.0}) < 1e-15);
  CHECK(std::abs(ps.at(1, 1) - std::polar(1.0, 0.5)) < 1e-15);

  Matrix h = element_matrix(Element::hwp("pol"));
  CHECK(std::abs(h.at(0, 1) - Complex{1.0, 0.0}) < 1e-15);
  CHECK(std::abs(h.at(1, 0) - Complex{1.0, 0.0}) < 1e-15);

  // Quarter-wave plate sends H to (H + i V)/sqrt2.
  Matrix q = element_matrix(Element::qwp("pol"));
  CHECK(std::abs(q.at(0, 0) - Complex{kH, 0.0}) < 1e-15);
  CHECK(std::abs(q.at(0, 1) - Complex{kH, 0.0}) < 1e-15);
  CHECK(std::abs(q.at(1, 0) - kI * kH) < 1e-15);
  CHECK(std::abs(q.at(1, 1) + kI * kH) < 1e-15);

  CHECK_THROWS_AS(element_matrix(Element::pbs("path", "pol")),
                  std::invalid_argument);
  CHECK_THROWS_AS(element_matrix(Element::blocker(0, "path")),
                  std::invalid_argument);
}

TEST_CASE("element matrices are unitary") {
  Rng rng(31);
  for (int it = 0; it < 50; ++it) {
    double t = iqsim::testing::uniform(rng, 0.0, 1.0);
    double phi = iqsim::testing::uniform(rng, 0.0, 6.283185307179586);
    CHECK(is_unitary(element_matrix(Element::bbs(t, "p")), 1e-12));
    CHECK(is_unitary(element_matrix(Element::phase_shifter(phi, "p")), 1e-12));
  }
  CHECK(is_unitary(element_matrix(Element::bs("p"))));
  CHECK(is_unitary(element_matrix(Element::mirror("p"))));
  CHECK(is_unitary(element_matrix(Element::hwp("p"))));
  CHECK(is_unitary(element_matrix(Element::qwp("p"))));
}

TEST_CASE("element factory validation") {
  CHECK_THROWS_AS(Element::bbs(1.5, "p"), std::invalid_argument);
  CHECK_THROWS_AS(Element::bbs(-0.1, "p"), std::invalid_argument);
  CHECK_THROWS_AS(Element::bbs(std::nan(""), "p"), std::invalid_argument);
  CHECK_THROWS_AS(Element::phase_shifter(INFINITY, "p"),
                  std::invalid_argument);
  CHECK_THROWS_AS(Element::blocker(2, "p"), std::invalid_argument);
  CHECK_THROWS_AS(Element::hwp_in_arm("p", 2, "s"), std::invalid_argument);
}

TEST_CASE("splitter output on one input beam") {
  // T |0> + i R |1>.
  auto r = apply(Element::bbs(0.8, "path"), ket(0));
  CHECK(r.survival == 1.0);
  CHECK(std::abs(r.state.amplitudes()[0] - Complex{0.8, 0.0}) < 1e-15);
  CHECK(std::abs(r.state.amplitudes()[1] - Complex{0.0, 0.6}) < 1e-15);
}

TEST_CASE("balanced interferometer in phase recombines to one port") {
  // bs, mirror, ps(0), bs on |0>: every photon exits port 0, with the
  // overall state -|0>.
  PureState s = ket(0);
  for (const Element& e :
       {Element::bs("path"), Element::mirror("path"),
        Element::phase_shifter(0.0, "path"), Element::bs("path")}) {
    s = apply(e, s).state;
  }
  CHECK(std::abs(s.amplitudes()[0] - Complex{-1.0, 0.0}) < 1e-14);
  CHECK(std::abs(s.amplitudes()[1]) < 1e-14);
}

TEST_CASE("unitary elements embed on the targeted subsystem") {
  // Mirror on path of |0 V>: index 1 -> i at index 3.
  PureState s = PureState::basis_state(path_pol(), {0, 1});
  auto r = apply(Element::mirror("path"), s);
  CHECK(std::abs(r.state.amplitudes()[3] - kI) < 1e-15);

  // HWP on pol flips V to H leaving path alone: |0 V> -> |0 H>.
  r = apply(Element::hwp("pol"), s);
  CHECK(std::abs(r.state.amplitudes()[0] - Complex{1.0, 0.0}) < 1e-15);

  CHECK_THROWS_AS(apply(Element::mirror("nope"), s), std::invalid_argument);
  CHECK_THROWS_AS(apply(Element::mirror("m"),
                        PureState::basis_state(ModeSpace({{"m", 3}}), {0})),
                  std::invalid_argument);
}

TEST_CASE("arm-local half-wave plate marks the path") {
  // A superposed path with H polarization and the plate in arm 1
  // entangles path and polarization: (|0 H> + i |1 V>)/sqrt2.
  Vector in(4);
  in[0] = kH;
  in[2] = kI * kH;
  PureState s(path_pol(), in);
  auto r = apply(Element::hwp_in_arm("path", 1, "pol"), s);
  CHECK(std::abs(r.state.amplitudes()[0] - Complex{kH, 0.0}) < 1e-15);
  CHECK(std::abs(r.state.amplitudes()[3] - kI * kH) < 1e-15);
  CHECK(std::abs(r.state.amplitudes()[1]) < 1e-15);
  CHECK(std::abs(r.state.amplitudes()[2]) < 1e-15);

  // Same plate in arm 0 leaves the arm-1 component alone.
  auto r0 = apply(Element::hwp_in_arm("path", 0, "pol"), s);
  CHECK(std::abs(r0.state.amplitudes()[1] - Complex{kH, 0.0}) < 1e-15);
  CHECK(std::abs(r0.state.amplitudes()[2] - kI * kH) < 1e-15);
}

TEST_CASE("arm-local quarter-wave plate rotates only its arm") {
  // |0 H> -> |0> (H + i V)/sqrt2; |1 H> untouched.
  PureState s0 = PureState::basis_state(path_pol(), {0, 0});
  auto r = apply(Element::qwp_in_arm("path", 0, "pol"), s0);
  CHECK(std::abs(r.state.amplitudes()[0] - Complex{kH, 0.0}) < 1e-15);
  CHECK(std::abs(r.state.amplitudes()[1] - kI * kH) < 1e-15);

  PureState s1 = PureState::basis_state(path_pol(), {1, 0});
  r = apply(Element::qwp_in_arm("path", 0, "pol"), s1);
  CHECK(std::abs(r.state.amplitudes()[2] - Complex{1.0, 0.0}) < 1e-15);
}

TEST_CASE("polarizing splitter routes path and polarization") {
  // (p, H) -> D_p unchanged; (p, V) -> D_{p+2} with a factor i.
  struct Case {
    std::size_t path, pol, detector;
    Complex factor;
  };
  for (const Case& c : {Case{0, 0, 0, {1, 0}}, Case{1, 0, 1, {1, 0}},
                        Case{0, 1, 2, {0, 1}}, Case{1, 1, 3, {0, 1}}}) {
    PureState in = PureState::basis_state(path_pol(), {c.path, c.pol});
    PureState out = apply_pbs(in);
    CHECK(out.space().count() == 2);
    CHECK(out.space().at(0).label == "detector");
    CHECK(out.space().at(0).dim == 4);
    CHECK(out.space().at(1).label == "pol");
    std::size_t idx = c.detector * 2 + c.pol;
    CHECK(std::abs(out.amplitudes()[idx] - c.factor) < 1e-15);
    double total = 0.0;
    for (const Complex& z : out.amplitudes().entries) total += std::norm(z);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  }

  CHECK_THROWS_AS(apply_pbs(ket(0)), std::invalid_argument);
}

TEST_CASE("blocker removes one arm and renormalizes") {
  Vector in{Complex{kH, 0.0}, kI * kH};
  PureState s(path_space(), in);
  auto r = apply(Element::blocker(0, "path"), s);
  CHECK(r.survival == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(std::abs(r.state.amplitudes()[0]) == 0.0);
  // Phase of the surviving arm is kept.
  CHECK(std::abs(r.state.amplitudes()[1] - kI) < 1e-14);

  try {
    apply(Element::blocker(0, "path"), ket(0));
    FAIL("expected FullyBlockedError");
  } catch (const FullyBlockedError& e) {
    CHECK(e.survival() == 0.0);
  }
}

TEST_CASE("pipeline validation") {
  ModeSpace space = path_pol();
  CHECK_THROWS_AS(
      Pipeline(space, {{"s1", Element::pbs("path", "pol")},
                       {"s2", Element::mirror("path")}}),
      std::invalid_argument);
  CHECK_THROWS_AS(Pipeline(space, {{"s1", Element::pbs("pol", "path")}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(Pipeline(space, {{"s1", Element::mirror("nope")}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(Pipeline(path_space(), {{"s1", Element::pbs("path", "pol")}}),
                  std::invalid_argument);

  Pipeline ok(space, {{"s1", Element::mirror("path")},
                      {"s2", Element::pbs("path", "pol")}});
  CHECK(ok.output_space().at(0).label == "detector");
  CHECK(ok.input_space().at(0).label == "path");
}

TEST_CASE("pipeline run records every stage") {
  Pipeline p(path_space(), {{"split", Element::bs("path")},
                            {"block", Element::blocker(1, "path")},
                            {"recombine", Element::bs("path")}});
  auto records = run_pipeline(p, ket(0));
  REQUIRE(records.size() == 4);
  CHECK(records[0].label == "initial");
  CHECK(records[0].survival == 1.0);
  CHECK(records[1].label == "split");
  CHECK(records[2].survival == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(records[3].survival == doctest::Approx(0.5).epsilon(1e-14));
  // After blocking arm 1, the survivor splits evenly again.
  double p0 = std::norm(records[3].state.amplitudes()[0]);
  CHECK(p0 == doctest::Approx(0.5).epsilon(1e-13));

  CHECK_THROWS_AS(run_pipeline(p, PureState::basis_state(path_pol(), {0, 0})),
                  std::invalid_argument);
}
