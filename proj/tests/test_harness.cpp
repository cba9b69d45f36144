#include <filesystem>

#include "doctest.h"
#include "nsldp/errors.hpp"
#include "nsldp/harness.hpp"
#include "nsldp/io.hpp"

using namespace nsldp;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  const fs::path d = fs::temp_directory_path() / "nsldp_test_harness";
  fs::remove_all(d);
  return d;
}

const char* kMinimalOu = R"({"kind": "ou_checks", "numerics": {"N": 8}, "statistics": {"replicas": 100, "seed": 2}})";

}  // namespace

TEST_CASE("configs fill defaults and reject unknown keys") {
  const ExperimentConfig cfg = parse_config(kMinimalOu);
  CHECK(cfg.kind == ExperimentKind::ou_checks);
  CHECK(cfg.numerics().at("dt").get<double>() == 5e-3);
  CHECK(cfg.params().at("step_dt").get<double>() == 0.05);
  CHECK_THROWS_AS(parse_config(R"({"kind": "ou_checks", "numerics": {"NN": 8}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"kind": "ou_checks", "extra": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"kind": "ou_checks", "numerics": {"N": 8.5}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"kind": "ou_checks", "numerics": {"dealias": 3}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"kind": "nope"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"kind": "ou_checks", "schema_version": 2})"), ConfigError);
  CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
}

TEST_CASE("config hash is canonical") {
  const auto a = parse_config(R"({"kind": "theorem1", "noise": {"epsilon": 1, "gamma": 1.0}})");
  const auto b = parse_config(R"({"noise": {"gamma": 1, "epsilon": 1.0}, "kind": "theorem1", "io": {"output_dir": "x"}})");
  const auto c = parse_config(R"({"kind": "theorem1", "noise": {"epsilon": 0.5}})");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(c));
  CHECK(config_hash(a).size() == 16);
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("validation names the violated constraint") {
  const auto bad = parse_config(R"({"kind": "theorem2", "params": {"sigma": -0.9}})");
  try {
    validate(bad);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.constraint() == "sigma > -2/p v (2/p - 1)");
  }
  CHECK_THROWS_AS(validate(parse_config(R"({"kind": "theorem1", "noise": {"schedule": {"exponent": 1.0}}})")),
                  ValidationError);
  CHECK_NOTHROW(validate(parse_config(
      R"({"kind": "theorem1", "noise": {"schedule": {"exponent": 1.0}}, "params": {"allow_scaling_violation": true}})")));
  CHECK_THROWS_AS(validate(parse_config(R"({"kind": "tube", "statistics": {"replicas": 10}})")), ValidationError);
  CHECK_THROWS_AS(validate(parse_config(R"({"kind": "lemma_a1", "noise": {"eta": 1.0}})")), ValidationError);
}

TEST_CASE("run writes one directory per config") {
  const fs::path root = scratch();
  const auto cfg = parse_config(kMinimalOu);
  const RunRecord rec = run(cfg, root);
  CHECK(rec.checks.size() == 4);
  CHECK(fs::path(rec.output_dir).filename() == "ou_checks-" + rec.config_hash.substr(0, 12));
  CHECK(fs::exists(fs::path(rec.output_dir) / "results.csv"));
  CHECK(fs::exists(fs::path(rec.output_dir) / "summary.json"));
  CHECK(fs::exists(fs::path(rec.output_dir) / "record.json"));
  CHECK(rec.replica_seeds.size() == 100);
  CHECK(rec.version == toolkit_version());
  const std::string first = read_file(fs::path(rec.output_dir) / "results.csv");
  run(cfg, root);
  CHECK(read_file(fs::path(rec.output_dir) / "results.csv") == first);
  CHECK(first.rfind("quantity,epsilon,delta,estimate,bound,ratio,stderr\n", 0) == 0);
}

TEST_CASE("sweep reports failing members and merges the rest") {
  const fs::path root = scratch();
  const auto base = parse_config(kMinimalOu);
  const auto res = sweep(base, "statistics.replicas", {100, 1, 120}, root, 2);
  REQUIRE(res.members.size() == 3);
  CHECK(res.members[0].error.empty());
  CHECK_FALSE(res.members[1].error.empty());
  CHECK(res.members[2].error.empty());
  CHECK_FALSE(res.pass);
  CHECK(res.merged_csv.find("\n2,120,") != std::string::npos);
  CHECK_THROWS_AS(sweep(base, "numerics.missing", {1}, root), ConfigError);
  CHECK(with_value(base, "noise.epsilon", 0.25).noise().at("epsilon").get<double>() == 0.25);
}

TEST_CASE("report summarizes one kind") {
  const fs::path root = scratch();
  CHECK_THROWS_AS(report({}), ConfigError);
  const auto a = run(parse_config(kMinimalOu), root);
  const auto b = run(parse_config(R"({"kind": "lemma_ca50", "numerics": {"N": 8}, "statistics": {"replicas": 200}})"), root);
  CHECK_THROWS_AS(report({a.output_dir, b.output_dir}), ConfigError);
  const auto doc = report({b.output_dir}, root / "report");
  CHECK(doc.kind == "lemma_ca50");
  CHECK(doc.csv.rfind("run,x,y,stderr\n", 0) == 0);
  CHECK(std::count(doc.csv.begin(), doc.csv.end(), '\n') == 5);
  CHECK(fs::exists(root / "report" / "report.txt"));
}
