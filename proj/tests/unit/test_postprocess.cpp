#include "hpfcfv/postprocess.hpp"

#include "hpfcfv/stokes.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

using namespace hpfcfv;
using namespace hpfcfv::test;

namespace {

std::string read_all(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(L2Error, RelativeAndAbsolute) {
  const Mesh m = distort(generate_structured_tris(6, 6), 0.2, 4);
  const ScalarField f = [](const Vec2& x) { return 1.0 + x.x() * x.y(); };
  std::vector<double> v(m.n_cells());
  for (int c = 0; c < m.n_cells(); ++c) v[c] = f(m.cell_centroid(c));
  EXPECT_EQ(l2_error_cells(m, v, f).value, 0.0);
  for (double& x : v) x *= 1.1;
  const L2Error e = l2_error_cells(m, v, f);
  EXPECT_TRUE(e.relative);
  EXPECT_NEAR(e.value, 0.1, 1e-14);

  const std::vector<double> ones(m.n_cells(), 0.5);
  const L2Error abs = l2_error_cells(m, ones, [](const Vec2&) { return 0.0; });
  EXPECT_FALSE(abs.relative);
  EXPECT_NEAR(abs.value, 0.5, 1e-14);  // sqrt(sum |cell| 0.25) on the unit square
  EXPECT_THROW(l2_error_cells(m, std::vector<double>(3), f), ConfigError);
}

TEST(L2Error, VoigtWeightsAndFaces) {
  const Mesh m = generate_structured_quads(3, 3);
  const std::vector<Voigt> L(m.n_cells(), Voigt(1, 0, 1));
  // Off-diagonal entries count twice in the Frobenius norm.
  EXPECT_NEAR(l2_error_cells(m, L, [](const Vec2&) { return Voigt(1, 0, 0); }).value, std::sqrt(2.0), 1e-14);

  const VectorField u = [](const Vec2& x) { return Vec2(x.y(), -x.x()); };
  std::vector<Vec2> uh(m.n_faces());
  for (int f = 0; f < m.n_faces(); ++f) uh[f] = 0.9 * u(m.face(f).barycentre);
  EXPECT_NEAR(l2_error_faces(m, uh, u).value, 0.1, 1e-14);
}

TEST(L2Error, MaskedCorners) {
  const Mesh m = generate_structured_quads(40, 40);
  std::vector<Vec2> v(m.n_cells(), Vec2::Zero());
  const VectorField ref = [](const Vec2&) { return Vec2(1.0, 0.0); };
  for (int c = 0; c < m.n_cells(); ++c) {
    const Vec2& x = m.cell_centroid(c);
    if (x.y() > 0.95 && (x.x() < 0.05 || x.x() > 0.95)) v[c] = Vec2(100.0, 0.0);
    else v[c] = Vec2(1.0, 0.0);
  }
  EXPECT_EQ(masked_l2_error(m, v, ref, cavity_corner_boxes()).value, 0.0);
  EXPECT_GT(masked_l2_error(m, v, ref, {}).value, 1.0);
  EXPECT_THROW(masked_l2_error(m, v, ref, {{-1, 2, -1, 2}}), ConfigError);
}

TEST(PressureShift, RecoversConstant) {
  const Mesh m = distort(generate_structured_quads(5, 5), 0.3, 2);
  const ScalarField p = [](const Vec2& x) { return std::sin(x.x()) + x.y(); };
  std::vector<double> v(m.n_cells());
  for (int c = 0; c < m.n_cells(); ++c) v[c] = p(m.cell_centroid(c)) - 0.3;
  EXPECT_NEAR(pressure_shift(m, v, p), 0.3, 1e-14);
}

TEST(MassFlux, LocalBalanceAndGlobalSum) {
  const CaseDefinition c = mixed_case();
  const Discretization d(c.tag(distort(generate_structured_quads(6, 6), 0.3, 6)), {}, c, false);
  const SolutionState s = solve_stokes(d);
  const MassFlux j = cell_mass_flux(d, s);
  EXPECT_LE(std::abs(j.sum), 1e-12);
  for (int e = 0; e < d.mesh().n_cells(); ++e) {
    // Mass row of the local problem: J_e = sum |face| tau_p (p-hat - p).
    double balance = 0.0;
    for (int f : d.mesh().cell_faces(e)) balance += d.mesh().face(f).measure * d.tau_p(f) * (s.phat[f] - s.p[e]);
    EXPECT_NEAR(j.per_cell[e], balance, 1e-12);
  }
  EXPECT_GT(j.max_abs, 0.0);
}

TEST(CellLocator, FindsEveryCentroid) {
  const Mesh m = distort(generate_structured_tris(9, 7), 0.3, 3);
  const CellLocator loc(m);
  for (int c = 0; c < m.n_cells(); ++c) EXPECT_EQ(loc.find(m.cell_centroid(c)), c);
  EXPECT_EQ(loc.find(Vec2(1.5, 0.5)), -1);
  EXPECT_GE(loc.find(Vec2(0.0, 0.0)), 0);

  const Mesh a = generate_annulus(32, 4, 1.0, 2.0, CellType::Quad);
  const CellLocator la(a);
  EXPECT_EQ(la.find(Vec2(0.0, 0.0)), -1);  // the hole
  for (int c = 0; c < a.n_cells(); c += 7) EXPECT_EQ(la.find(a.cell_centroid(c)), c);
}

TEST(TransferState, NestedMeshes) {
  const Mesh coarse = generate_structured_quads(2, 2);
  const Mesh fine = generate_structured_quads(4, 4);
  SolutionState s = SolutionState::zeros(coarse);
  for (int c = 0; c < 4; ++c) {
    s.u[c] = Vec2(c, -c);
    s.p[c] = 10.0 * c;
    s.L[c] = Voigt(c, c, c);
  }
  const SolutionState t = transfer_state(coarse, s, fine);
  ASSERT_TRUE(t.matches(fine));
  for (int c = 0; c < fine.n_cells(); ++c) {
    const int k = CellLocator(coarse).find(fine.cell_centroid(c));
    EXPECT_EQ(t.u[c], s.u[k]);
    EXPECT_EQ(t.p[c], s.p[k]);
  }
  for (int f = 0; f < fine.n_faces(); ++f) {
    const Face& face = fine.face(f);
    const double expected = face.is_boundary() ? t.p[face.owner] : 0.5 * (t.p[face.owner] + t.p[face.neighbour]);
    EXPECT_EQ(t.phat[f], expected);
  }
  EXPECT_EQ(t.lambda, 0.0);
  EXPECT_THROW(transfer_state(fine, s, coarse), ConfigError);
}

TEST(Centreline, TiesAndOrdering) {
  const Mesh odd = generate_structured_quads(5, 5);
  SolutionState s = SolutionState::zeros(odd);
  for (int c = 0; c < odd.n_cells(); ++c) s.u[c] = odd.cell_centroid(c);
  const auto v = centreline_profiles(odd, s, Centreline::Vertical);
  ASSERT_EQ(v.size(), 5u);
  for (std::size_t i = 0; i < v.size(); ++i) {
    EXPECT_NEAR(v[i].point.x(), 0.5, 1e-15);
    EXPECT_NEAR(v[i].coord, 0.1 + 0.2 * i, 1e-15);
    EXPECT_EQ(v[i].u, v[i].point);
  }
  const Mesh even = generate_structured_quads(4, 4);
  const auto h = centreline_profiles(even, SolutionState::zeros(even), Centreline::Horizontal);
  ASSERT_EQ(h.size(), 8u);  // centroids at 0.375 and 0.625 tie
  for (std::size_t i = 1; i < h.size(); ++i) EXPECT_LE(h[i - 1].coord, h[i].coord);
}

TEST(Profiles, InterpolateAndRms) {
  const std::vector<std::pair<double, double>> t{{0.0, 0.0}, {0.5, 1.0}, {1.0, 0.0}};
  EXPECT_EQ(interpolate(t, 0.25), 0.5);
  EXPECT_EQ(interpolate(t, -1.0), 0.0);
  EXPECT_EQ(interpolate(t, 2.0), 0.0);
  EXPECT_EQ(interpolate(t, 0.5), 1.0);
  EXPECT_THROW(interpolate({}, 0.1), ConfigError);

  std::vector<ProfileSample> samples;
  for (double y : {0.1, 0.3, 0.6, 0.98}) samples.push_back({y, Vec2(0.5, y), Vec2(interpolate(t, y) + 0.1, 0), 0});
  EXPECT_NEAR(profile_rms(samples, 0, t, 2.0), 0.05, 1e-15);
  samples.back().u.x() = 50.0;
  EXPECT_NEAR(profile_rms(samples, 0, t, 2.0, {{0.4, 0.6, 0.95, 1.0}}), 0.05, 1e-15);
  EXPECT_EQ(profile_table(samples, 0).size(), 4u);
}

TEST(Profiles, CsvRoundTripIsExact) {
  std::vector<ProfileSample> samples{{0.1, Vec2(0.5, 0.1), Vec2(1.0 / 3.0, -2.0 / 7.0), 1e-17},
                                     {0.7, Vec2(0.5, 0.7), Vec2(std::sqrt(2.0), 0.0), -5.5}};
  std::stringstream s;
  write_profile_csv(s, samples);
  std::string line;
  std::getline(s, line);
  EXPECT_EQ(line, "coord,u1,u2,p");
  for (const auto& smp : samples) {
    std::getline(s, line);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double c, u1, u2, p;
    row >> c >> u1 >> u2 >> p;
    EXPECT_EQ(c, smp.coord);
    EXPECT_EQ(u1, smp.u.x());
    EXPECT_EQ(u2, smp.u.y());
    EXPECT_EQ(p, smp.p);
  }
}

TEST(Vtk, MatchesGoldenFile) {
  const CaseDefinition c = synthetic_stokes();
  const Discretization d(c.tag(generate_structured_quads(2, 2)), {}, c, false);
  std::ostringstream out;
  write_vtk(out, d.mesh(), solve_stokes(d));
  const std::string golden = read_all(std::string(HPFCFV_TEST_DATA) + "/stokes_2x2.vtk");
  ASSERT_FALSE(golden.empty());
  EXPECT_EQ(out.str(), golden);
}

TEST(Vtk, TriangleLayout) {
  const Mesh m = generate_structured_tris(1, 1);
  std::ostringstream out;
  write_vtk(out, m, SolutionState::zeros(m));
  const std::string s = out.str();
  EXPECT_NE(s.find("CELLS 2 8\n3 0 1 3\n3 0 3 2\n"), std::string::npos) << s;
  EXPECT_NE(s.find("CELL_TYPES 2\n5\n5\n"), std::string::npos);
}

TEST(ConvergenceReport, Rate) {
  EXPECT_NEAR(*ConvergenceReport::rate(1.0, 0.25, 0.1, 0.05), 2.0, 1e-14);
  EXPECT_FALSE(ConvergenceReport::rate(0.0, 0.25, 0.1, 0.05).has_value());
  EXPECT_FALSE(ConvergenceReport::rate(1.0, 0.5, 0.1, 0.1).has_value());
}

TEST(ConvergenceStudy, SyntheticStokesTwoLevels) {
  const CaseDefinition c = synthetic_stokes();
  const ConvergenceReport r = convergence_study(c, standard_family(c.name, CellType::Quad), 1, 2, {});
  ASSERT_EQ(r.levels.size(), 2u);
  const LevelResult& a = r.levels[0];
  const LevelResult& b = r.levels[1];
  EXPECT_EQ(a.cells, 256);
  EXPECT_EQ(a.unknowns, 1536);
  EXPECT_DOUBLE_EQ(b.h, 0.5 * a.h);
  for (double LevelResult::*e : {&LevelResult::err_u, &LevelResult::err_uhat, &LevelResult::err_p,
                                 &LevelResult::err_phat, &LevelResult::err_L}) {
    EXPECT_LT(b.*e, a.*e);
    EXPECT_GT(*ConvergenceReport::rate(a.*e, b.*e, a.h, b.h), 0.7);
  }
  EXPECT_LE(std::abs(a.sum_je), 1e-10);
  EXPECT_LT(b.max_je, a.max_je);

  std::ostringstream csv;
  write_convergence_csv(csv, r);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')),
            "level,h,err_u,err_uhat,err_p,err_phat,err_L,rate_u,rate_p,rate_L,maxJe,sumJe");
  EXPECT_THROW(convergence_study(c, standard_family(c.name, CellType::Quad), 2, 1, {}), ConfigError);
}

TEST(ConvergenceStudy, TauPSweep) {
  const CaseDefinition c = synthetic_stokes();
  const auto rows = tau_p_sweep(c, standard_family(c.name, CellType::Tri), 1, {1e-2, 1.0}, {});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].tau_p, 1e-2);
  EXPECT_LE(rows[0].result.max_je, rows[1].result.max_je);
  std::ostringstream csv;
  write_sweep_csv(csv, rows);
  const std::string text = csv.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
}

TEST(SequencedSolve, CouetteTwoLevels) {
  const CaseDefinition c = couette();
  const LevelSolve s = solve_sequenced(c, standard_family(c.name, CellType::Quad), 2, zero_mean_config());
  EXPECT_TRUE(s.result.report.converged);
  EXPECT_EQ(s.coarse.size(), 1u);
  EXPECT_EQ(s.d.mesh().n_cells(), 1024);
  const LevelResult r = evaluate_level(s.d, c, s.result, 2);
  EXPECT_LT(r.err_u, 0.05);
  EXPECT_THROW(solve_sequenced(c, standard_family(c.name, CellType::Quad), 0, zero_mean_config()), ConfigError);
}

TEST(EvaluateLevel, NoExactSolution) {
  const CaseDefinition c = cavity(100);
  const Discretization d(c.tag(generate_structured_tris(4, 4)), zero_mean_config(), c, false);
  const NewtonResult r = solve_case(d);
  ASSERT_TRUE(r.report.converged);
  const LevelResult lr = evaluate_level(d, c, r, 1);
  EXPECT_TRUE(std::isnan(lr.err_u));
  EXPECT_LE(std::abs(lr.sum_je), 1e-12);
}

TEST(PiecewiseVelocity, InsideAndOutside) {
  const Mesh m = generate_structured_quads(2, 2);
  SolutionState s = SolutionState::zeros(m);
  s.u = {Vec2(1, 0), Vec2(2, 0), Vec2(3, 0), Vec2(4, 0)};
  const VectorField f = piecewise_velocity(m, s);
  EXPECT_EQ(f(Vec2(0.75, 0.25)), Vec2(2, 0));
  EXPECT_EQ(f(Vec2(0.25, 0.75)), Vec2(3, 0));
  EXPECT_TRUE(std::isnan(f(Vec2(-1, 0)).x()));
}

TEST(WriteFile, BadPathThrows) {
  EXPECT_THROW(write_file("/nonexistent/dir/out.txt", [](std::ostream& o) { o << 1; }), std::runtime_error);
}
