#include <algorithm>
#include <sstream>

#include "doctest.h"
#include "stlc/io.hpp"

using namespace stlc;

TEST_CASE("potential descriptors") {
  const PotentialSpec lin = parse_potential(json::parse(R"({"type":"linear"})"));
  CHECK(lin.desc.kind == PotentialDesc::Kind::Linear);
  const PotentialSpec co = parse_potential(json::parse(R"({"type":"coeffs","m":[0.5,0.1],"slope0":1,"slope1":1})"));
  CHECK(co.desc.m.size() == 2);
  CHECK(co.desc.slope1 == 1.0);
  const PotentialSpec cp = parse_potential(json::parse(R"({"type":"cosine_poly","terms":[{"j":2,"amp":0.3}]})"));
  REQUIRE(cp.desc.terms.size() == 1);
  CHECK(cp.desc.terms[0].first == 2);
  CHECK(parse_potential(json::parse(R"({"type":"balanced","k":2})")).balanced_k == 2);
  CHECK_THROWS_AS(parse_potential(json::parse(R"({"type":"spline"})")), precondition_error);
  CHECK_THROWS_WITH_AS(parse_potential(json::parse(R"({"type":"coeffs"})")), "insufficient potential data",
                       precondition_error);
  const Potential p = make_potential(lin, 16);
  CHECK(p.J() == 16);
}

TEST_CASE("config validation") {
  const RunConfig c = parse_config(json::parse(R"({"k":1,"T":[0.1,0.2],"J_sim":8,"target":[[0,1,0],[1,0,1]]})"));
  CHECK(c.T.size() == 2);
  const Vec t = config_target(c, 8);
  CHECK(t.norm() == doctest::Approx(1.0));
  CHECK(t(1).imag() == doctest::Approx(std::sqrt(0.5)));
  CHECK_THROWS_AS(parse_config(json::parse(R"({"T":[]})")), precondition_error);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"tol":0})")), precondition_error);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"T":-1})")), precondition_error);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"T":"x"})")), precondition_error);
  RunConfig d = parse_config(json::parse(R"({"k":0,"eps":0.01})"));
  const Vec t0 = config_target(d, 4);
  CHECK(t0(0).real() == doctest::Approx(std::sqrt(1.0 - 1e-4)));
  CHECK(t0(0).imag() == doctest::Approx(0.01));
}

TEST_CASE("control CSV and JSON round trips are exact") {
  const Control u = Control::from_real(0.3, {0.1, -2.5, 1.0 / 3.0});
  std::stringstream ss;
  write_control_csv(ss, u);
  const Control v = read_control_csv(ss, 0.3);
  REQUIRE(v.N() == 3);
  for (long n = 0; n < 3; ++n) CHECK(v.values[std::size_t(n)] == u.values[std::size_t(n)]);
  CHECK(v.real);
  const Control w = Control(0.5, {cplx(1.0, 2.0), cplx(-0.1, 1e-300)});
  const Control x = control_from_json(json::parse(control_to_json(w).dump()));
  CHECK(x.values == w.values);
  CHECK_FALSE(x.real);
  std::stringstream bad("nope\n1,2,3\n");
  CHECK_THROWS_AS(read_control_csv(bad, 1.0), precondition_error);
}

TEST_CASE("emitters are deterministic") {
  const Potential p = cosine_coefficients(PotentialDesc::linear(), 32);
  const KernelModel m = interaction_coefficients(p, 0, 32);
  std::stringstream a, b;
  write_coefficients_csv(a, p, m);
  write_coefficients_csv(b, p, m);
  CHECK(a.str() == b.str());
  std::string line;
  std::getline(a, line);
  CHECK(line == "j,lambda_j,m_j,c_j");
  std::stringstream k, th;
  write_kernel_csv(k, m, 1.0, 10);
  write_theta_csv(th, m, 100.0, 10);
  const std::string ks = k.str(), ts = th.str();
  CHECK(std::count(ks.begin(), ks.end(), '\n') == 12);
  CHECK(std::count(ts.begin(), ts.end(), '\n') == 11);
  CHECK(to_json(classify(p, 0)).at("verdict") == "DRIFT");
  CHECK(fmt(0.1) == "0.10000000000000001");
}
