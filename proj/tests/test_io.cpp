#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "vortexlab/pipeline.hpp"

using namespace vortexlab;
using Catch::Approx;

namespace {

const char* kMinimal = R"({"seed": 7, "shape": {"kind": "disk", "radius": 1.0}, "params": {"rho": 0.01}})";

ErrorKind kind_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected a parse error");
  return ErrorKind::InvalidArgument;
}

GridField random_field(GridPtr g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  return sample_field(g, [&](Vec2) { return std::ldexp(n01(rng), static_cast<int>(rng() % 40) - 20); });
}

bool bit_equal(const GridField& a, const GridField& b) {
  if (a.grid->nx != b.grid->nx || a.grid->ny != b.grid->ny) return false;
  for (std::size_t k = 0; k < a.values.size(); ++k) {
    if (a.grid->mask[k] != b.grid->mask[k]) return false;
    if (a.grid->mask[k] && a.values[k] != b.values[k]) return false;
  }
  return a.grid->xs == b.grid->xs && a.grid->ys == b.grid->ys;
}

}  // namespace

TEST_CASE("minimal config gets defaults", "[io]") {
  auto c = parse_config(kMinimal);
  CHECK(c.seed == 7);
  CHECK(c.shape.is_disk());
  CHECK(c.rhos == std::vector<double>{0.01});
  CHECK(c.gammas == std::vector<double>{1.0});
  CHECK(c.tau == 1.0);
  CHECK(c.n == 257);
  CHECK(c.projection == ProjectionMode::Exact);
  CHECK(c.newton.tol_rel == 1e-10);
  CHECK(c.search.starts == 64);
  CHECK_FALSE(c.xi.has_value());
  CHECK(c.hash().size() == 16);
}

TEST_CASE("range errors name the field", "[io]") {
  const char* bad = R"({"seed": 1, "shape": {"kind": "ellipse", "a": 2, "b": 1},
                        "params": {"rho": 0.01, "gamma_schedule": "1,2,4", "tau": -1}})";
  try {
    parse_config(bad);
    FAIL("expected RangeError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::RangeError);
    CHECK(std::string(e.what()).find("tau") != std::string::npos);
  }
  CHECK(kind_of(R"({"seed": 1, "shape": {"kind": "disk", "radius": 1}, "params": {"rho_schedule": [0.01, 0.02]}})") == ErrorKind::RangeError);
  CHECK(kind_of(R"({"seed": 1, "shape": {"kind": "ellipse", "a": 0, "b": 1}})") == ErrorKind::RangeError);
}

TEST_CASE("schema errors", "[io]") {
  CHECK(kind_of(R"({"seed": 1, "shape": {"kind": "disk", "radius": 1}, "bogus": 3})") == ErrorKind::SchemaError);
  CHECK(kind_of(R"({"seed": 1, "shape": {"kind": "disk", "radius": 1, "extra": 0}})") == ErrorKind::SchemaError);
  CHECK(kind_of(R"({"shape": {"kind": "disk"}})") == ErrorKind::SchemaError);
  CHECK(kind_of(R"({"seed": 1, "shape": {"kind": "disk", "radius": 1}, "params": {"rho": "small"}})") == ErrorKind::SchemaError);
  CHECK(kind_of("{not json") == ErrorKind::SchemaError);
}

TEST_CASE("gamma schedule from a string", "[io]") {
  auto c = parse_config(R"({"seed": 1, "shape": {"kind": "disk", "radius": 1}, "params": {"gamma_schedule": "1,2,4"}})");
  CHECK(c.gammas == std::vector<double>{1, 2, 4});
  CHECK(parse_list("0.5, 0.25", "x") == std::vector<double>{0.5, 0.25});
}

TEST_CASE("config hash is deterministic and content-sensitive", "[io][property]") {
  auto a = parse_config(kMinimal), b = parse_config(kMinimal);
  CHECK(a.canonical() == b.canonical());
  CHECK(a.hash() == b.hash());
  auto c = parse_config(R"({"seed": 8, "shape": {"kind": "disk", "radius": 1.0}, "params": {"rho": 0.01}})");
  CHECK(c.hash() != a.hash());
}

TEST_CASE("field round trip is bit-exact", "[io][property]") {
  const DomainShape ell = DomainShape::ellipse({0.1, -0.2}, 1.5, 1.0);
  for (GridPtr g : {make_grid(ell, 33), make_graded_grid(ell, 33, {{{0.3, 0.1}, 1e-3}})}) {
    auto f = random_field(g, 17);
    auto text = format_field(f, "config_hash 0123456789abcdef");
    auto back = parse_field(text, &ell);
    CHECK(bit_equal(f, back));
    auto shapeless = parse_field(text);
    CHECK(bit_equal(f, shapeless));
    // Exterior nodes are `nan` in the file and masked again on reading.
    std::size_t nans = 0, pos = 0;
    while ((pos = text.find("nan", pos)) != std::string::npos) ++nans, pos += 3;
    CHECK(nans == g->size() - static_cast<std::size_t>(g->interior_count()));
  }
  auto tmp = std::filesystem::temp_directory_path() / "vortexlab_test_field.fld";
  auto f = random_field(make_grid(DomainShape::disk({0, 0}, 1.0), 17), 3);
  write_field(f, tmp.string());
  CHECK(bit_equal(f, read_field(tmp.string())));
  std::filesystem::remove(tmp);
}

TEST_CASE("malformed fields", "[io]") {
  auto f = random_field(make_grid(DomainShape::disk({0, 0}, 1.0), 17), 4);
  auto text = format_field(f);
  auto expect_format_error = [](const std::string& t) {
    try {
      parse_field(t);
      FAIL("expected FormatError");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::FormatError);
    }
  };
  expect_format_error(text.substr(0, text.rfind(' ')));  // short payload
  expect_format_error(text + " 1.0\n");                   // long payload
  std::string wrong = text;
  wrong.replace(0, 2, "18");  // nx in the header no longer matches the payload
  expect_format_error(wrong);
  expect_format_error("");
  try {
    read_field("/nonexistent/dir/u.fld");
    FAIL("expected IOError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IOError);
  }
}

TEST_CASE("sweep CSV columns", "[io]") {
  BranchReport rep;
  SweepRecord r;
  r.gamma = 2;
  r.cfg = {{0.1, 0.2}, {0.3, 0.4}, 2, 1};
  r.dist_boundary = 0.5;
  r.dist_argmax = 0.01;
  r.nu_gap = 0.002;
  rep.records.push_back(r);
  std::istringstream in(sweep_csv(rep));
  std::string header, row, extra;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "gamma,xi1x,xi1y,xi2x,xi2y,dist_boundary,dist_argmax,nu_gap");
  CHECK(std::count(row.begin(), row.end(), ',') == 7);
  CHECK_FALSE((std::getline(in, extra) && !extra.empty()));
}

TEST_CASE("pipeline reruns are deterministic", "[io][property]") {
  auto cfg = parse_config(R"({"seed": 3, "shape": {"kind": "disk", "radius": 1}, "grid": {"n": 65},
      "params": {"rho_schedule": [0.05, 0.04], "gamma": 2}, "config": {"xi1": [0.19, 0], "xi2": [-0.76, 0]}})");
  auto a = run_pipeline(cfg, false), b = run_pipeline(cfg, false);
  a.report.erase("timing");
  b.report.erase("timing");
  CHECK(a.report.dump() == b.report.dump());
  CHECK(a.report["config_hash"] == cfg.hash());
  CHECK(a.exit_code == b.exit_code);
}

TEST_CASE("exit codes by error kind", "[io]") {
  CHECK(exit_code_for(ErrorKind::SchemaError) == 2);
  CHECK(exit_code_for(ErrorKind::RangeError) == 2);
  CHECK(exit_code_for(ErrorKind::FormatError) == 2);
  CHECK(exit_code_for(ErrorKind::GridTooCoarse) == 3);
  CHECK(exit_code_for(ErrorKind::BranchLost) == 3);
}
