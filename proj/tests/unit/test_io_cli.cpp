#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "doctest.h"
#include "dreamespase/cli.hpp"
#include "dreamespase/config.hpp"
#include "dreamespase/errors.hpp"
#include "dreamespase/hsm.hpp"
#include "dreamespase/io.hpp"

using namespace dreamespase;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("dreamespase-test-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& text) const {
    const auto p = path / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

int tool(std::vector<std::string> args) {
  args.insert(args.begin(), {"--log-level", "off"});
  return cli::run(args);
}

std::set<std::string> listing(const std::string& dir) {
  std::set<std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out.insert(e.path().filename().string());
  return out;
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

std::string cells_csv() {
  Rng rng(3);
  const hsm::Window w{0, 300, 0, 300};
  std::string text = "biopsy_id,x,y,type\n";
  auto emit = [&](const std::string& id, const hsm::MarkedPattern& m, bool immune) {
    for (const auto& p : m.points_1) text += id + "," + io::format_number(p.x) + "," + io::format_number(p.y) + ",1\n";
    if (!immune) return;
    for (const auto& p : m.points_2) text += id + "," + io::format_number(p.x) + "," + io::format_number(p.y) + ",2\n";
  };
  const double b = std::log(900.0 / w.area());
  emit("A", hsm::simulate_hsm({b, b, 0.0, 30.0}, w, rng, 20000), true);
  emit("B", hsm::simulate_hsm({b, b, 0.0, 30.0}, w, rng, 20000), false);
  emit("C", hsm::simulate_hsm({b, b, -0.05, 30.0}, w, rng, 20000), true);
  return text;
}

}  // namespace

TEST_CASE("CSV reading") {
  TempDir dir;
  const auto good = dir.file("a.csv", "name, value\n\"x, y\",1.5\r\n\n\"say \"\"hi\"\"\",2\n");
  const auto t = io::read_csv(good);
  CHECK(t.header == std::vector<std::string>{"name", "value"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][0] == "x, y");
  CHECK(t.rows[1][0] == "say \"hi\"");
  CHECK(t.number(0, 1) == 1.5);
  CHECK(t.lines[1] == 4);
  CHECK(t.where(1) == good + ":4");

  const auto ragged = dir.file("r.csv", "a,b\n1,2\n3\n");
  CHECK(message_of([&] { io::read_csv(ragged); }) == ragged + ":3: expected 2 fields, found 1");
  CHECK_THROWS_AS(io::read_csv(ragged), ValidationError);
  CHECK_THROWS_AS(io::read_csv(dir / "missing.csv"), IoError);
  const auto dup = dir.file("d.csv", "a,a\n1,2\n");
  CHECK_THROWS_AS(io::read_csv(dup), ValidationError);
  const auto bad_number = dir.file("n.csv", "a\nabc\n");
  CHECK(message_of([&] { io::read_csv(bad_number).number(0, 0); }).find(":2") != std::string::npos);
  CHECK_THROWS_AS(io::read_csv(good).require_column("nope"), ValidationError);
}

TEST_CASE("CSV writing round-trips") {
  TempDir dir;
  for (double v : {0.1, -1e-300, 1.0 / 3.0, 123456789.125, 6.02214076e23}) {
    CHECK(std::stod(io::format_number(v)) == v);
  }
  io::CsvWriter w({"id", "text", "value"});
  w.row({"1", "plain", io::format_number(0.1)}).row({"2", "has,comma \"q\"", io::format_number(-2.5)});
  w.save(dir / "w.csv");
  const auto t = io::read_csv(dir / "w.csv");
  CHECK(t.rows[1][1] == "has,comma \"q\"");
  CHECK(t.number(0, 2) == 0.1);
  CHECK_THROWS(w.row({"too", "few"}));
  CHECK(io::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("domain readers validate their schemas") {
  TempDir dir;
  CHECK(message_of([&] { io::read_cells(dir.file("c.csv", "biopsy_id,x,y,type\nA,1,2,1\nA,3,4,7\n")); })
            .find("c.csv:3: unknown cell type code") != std::string::npos);
  const auto cells = io::read_cells(dir.file("c2.csv", "biopsy_id,x,y,type\nA,1,2,1\nA,3,5,2\nB,0,0,1\nB,2,2,2\n"));
  REQUIRE(cells.size() == 2);
  CHECK(cells[0].first == "A");
  CHECK(cells[0].second.window.x_min == 1);
  CHECK(cells[0].second.window.y_max == 5);

  const auto outcomes = dir.file("o.csv", "biopsy_id,node,y\nb1,1,0.5\nb1,0,0.25\nb2,0,1\nb2,1,2\n");
  const auto adjacency = dir.file("a.csv", "biopsy_id,node_a,node_b\nb1,0,1\nb2,0,1\n");
  const auto covariates = dir.file("x.csv", "biopsy_id,age,dose\nb1,1,2\nb2,3,4\n");
  const auto o = io::read_outcomes(outcomes);
  CHECK(o[0].second[0] == 0.25);
  const auto biopsies = io::assemble_biopsies(o, io::read_adjacency(adjacency), io::read_covariates(covariates));
  CHECK(biopsies.size() == 2);
  CHECK(biopsies[1].x[1] == 4);

  const auto missing_cov = io::read_covariates(dir.file("x2.csv", "biopsy_id,age\nb1,1\n"));
  CHECK_THROWS_AS(io::assemble_biopsies(o, io::read_adjacency(adjacency), missing_cov), ValidationError);
  const auto far = io::read_adjacency(dir.file("a2.csv", "biopsy_id,node_a,node_b\nb1,0,5\nb2,0,1\n"));
  CHECK_THROWS_AS(io::assemble_biopsies(o, far, io::read_covariates(covariates)), ValidationError);
  CHECK_THROWS_AS(io::read_adjacency(dir.file("a3.csv", "biopsy_id,node_a,node_b\nb1,1,1\n")), ValidationError);
  CHECK_THROWS_AS(io::read_outcomes(dir.file("o2.csv", "biopsy_id,node,y\nb1,0,1\nb1,2,1\n")), ValidationError);
  CHECK_THROWS_AS(io::read_covariates(dir.file("x3.csv", "biopsy_id,age\nb1,nan\n")), ValidationError);
}

TEST_CASE("configuration parsing") {
  using config::json;
  CHECK(message_of([] { config::parse_fit(json{{"bogus", 1}}); }) == "config.bogus: unknown key");
  CHECK(message_of([] { config::parse_fit(json{{"iterations", "many"}}); }).rfind("config.iterations", 0) == 0);
  CHECK(message_of([] { config::parse_fit(json{{"sigma2_spike", 200.0}}); }).rfind("config.", 0) == 0);
  const auto fit = config::parse_fit(json{{"rho_grid", "uniform:4"}, {"variant", "nsds"}, {"seed", 9}});
  CHECK(fit.prior.rho_grid.values.size() == 4);
  CHECK(fit.variant == gibbs::Variant::nsds);
  CHECK(fit.schedule.seed == 9);
  const auto fit2 = config::parse_fit(config::to_json(fit));
  CHECK(config::to_json(fit2) == config::to_json(fit));
  CHECK(config::parse_fit(json{{"rho_grid", {{"values", {0.1, 0.5}}, {"probs", {0.25, 0.75}}}}})
            .prior.rho_grid.probs[1] == 0.75);
  CHECK_THROWS_AS(config::parse_fit(json{{"rho_grid", "triangular:3"}}), ValidationError);

  const auto setting = config::parse_setting(json{{"ratio", 0.75}, {"n_biopsies", 30}});
  CHECK(setting.p == 75);
  CHECK(setting.n_biopsies == 30);
  CHECK_THROWS_AS(config::parse_setting(json{{"ratio", 0.3}}), ValidationError);
  CHECK(message_of([] { config::parse_benchmark(json{{"fit", {{"sigma2_spike", "x"}}}}); })
            .rfind("config.fit.sigma2_spike", 0) == 0);
  CHECK_THROWS_AS(config::parse_benchmark(json{{"methods", {"nsds", "nsds"}}}), ValidationError);
  CHECK_THROWS_AS(config::parse_hsm_fit(json{{"step", {0.1, 0.1}}}), ValidationError);
  CHECK(config::parse_preprocess(json::object()).threshold == 0.8);

  TempDir dir;
  CHECK_THROWS_AS(config::read_json(dir.file("bad.json", "{\"a\": ")), ValidationError);
  CHECK_THROWS_AS(config::read_json(dir / "none.json"), IoError);
}

TEST_CASE("simulate, fit and replay through the command line") {
  TempDir dir;
  const auto sim_cfg = dir.file("sim.json", R"({"n_biopsies": 12, "p": 8, "rows": 2, "cols": 3})");
  REQUIRE(tool({"simulate", "--config", sim_cfg, "--seed", "4", "--out", dir / "sim"}) == 0);
  CHECK(listing(dir / "sim") ==
        std::set<std::string>{"adjacency.csv", "covariates.csv", "manifest.json", "outcomes.csv", "truth.json"});
  const auto manifest = config::read_json(dir / "sim/manifest.json");
  CHECK(manifest["seed"] == 4);
  CHECK(manifest["config"]["n_biopsies"] == 12);
  CHECK(manifest["version"] == cli::kVersion);

  // CSV outputs round-trip through the readers
  const auto biopsies =
      io::assemble_biopsies(io::read_outcomes(dir / "sim/outcomes.csv"), io::read_adjacency(dir / "sim/adjacency.csv"),
                            io::read_covariates(dir / "sim/covariates.csv"));
  CHECK(biopsies.size() == 12);
  CHECK(biopsies[0].n() == 6);

  const auto fit_cfg = dir.file("fit.json", R"({"iterations": 300, "burn_in": 100, "thin": 2})");
  const std::vector<std::string> fit_args{"fit",          "--outcomes",   dir / "sim/outcomes.csv",
                                          "--adjacency",  dir / "sim/adjacency.csv",
                                          "--covariates", dir / "sim/covariates.csv",
                                          "--config",     fit_cfg};
  auto args = fit_args;
  args.insert(args.end(), {"--out", dir / "fit"});
  REQUIRE(tool(args) == 0);
  const auto sel = config::read_json(dir / "fit/selection.json");
  CHECK(sel["fixed_probability"].size() == 8);
  CHECK(sel["kept_draws"] == 100);
  CHECK(sel["geweke"].contains("p"));
  const auto alpha = io::read_csv(dir / "fit/posterior_alpha.csv");
  CHECK(alpha.rows.size() == 800);
  CHECK(io::read_csv(dir / "fit/loglik_trace.csv").rows.size() == 300);

  // --from-manifest reproduces every output byte for byte
  REQUIRE(tool({"--from-manifest", dir / "fit/manifest.json", "--out", dir / "replay"}) == 0);
  for (const auto& name : listing(dir / "fit")) {
    if (name == "manifest.json") continue;
    CAPTURE(name);
    CHECK(io::sha256_file(dir / ("fit/" + name)) == io::sha256_file(dir / ("replay/" + name)));
  }
  // the thread count never changes results
  REQUIRE(tool({"--from-manifest", dir / "sim/manifest.json", "--out", dir / "sim4", "--threads", "4"}) == 0);
  CHECK(io::sha256_file(dir / "sim/outcomes.csv") == io::sha256_file(dir / "sim4/outcomes.csv"));

  // a changed input is refused
  { std::ofstream(dir / "sim/outcomes.csv", std::ios::app) << "b1,6,0.0\n"; }
  CHECK(tool({"--from-manifest", dir / "fit/manifest.json", "--out", dir / "replay2"}) == cli::kValidation);
  CHECK_FALSE(fs::exists(dir / "replay2"));

  // nsds routing
  const auto nsds_cfg = dir.file("nsds.json", R"({"iterations": 50, "burn_in": 10, "thin": 1, "variant": "nsds"})");
  args = fit_args;
  args[args.size() - 1] = nsds_cfg;
  args.insert(args.end(), {"--out", dir / "nsds"});
  args[2] = dir / "sim4/outcomes.csv";
  REQUIRE(tool(args) == 0);
  CHECK(config::read_json(dir / "nsds/manifest.json")["config"]["variant"] == "nsds");
}

TEST_CASE("a 300000-iteration schedule thinned by 10 keeps 15000 draws") {
  TempDir dir;
  const auto outcomes = dir.file("o.csv", "biopsy_id,node,y\nb1,0,0.1\nb1,1,0.4\nb2,0,-0.3\nb2,1,0.2\nb3,0,1\nb3,1,0.7\n");
  const auto adjacency = dir.file("a.csv", "biopsy_id,node_a,node_b\nb1,0,1\nb2,0,1\nb3,0,1\n");
  const auto covariates = dir.file("x.csv", "biopsy_id,z\nb1,-1\nb2,0.5\nb3,1.5\n");
  const auto cfg = dir.file("c.json", R"({"iterations": 300000, "burn_in": 150000, "thin": 10})");
  REQUIRE(tool({"fit", "--outcomes", outcomes, "--adjacency", adjacency, "--covariates", covariates, "--config", cfg,
                "--out", dir / "fit"}) == 0);
  CHECK(config::read_json(dir / "fit/selection.json")["kept_draws"] == 15000);
}

TEST_CASE("exit codes and no partial outputs") {
  TempDir dir;
  const auto bad = dir.file("bad.json", R"({"iterations": 10, "bogus": 1})");
  CHECK(tool({"simulate", "--config", bad, "--out", dir / "o1"}) == cli::kValidation);
  CHECK_FALSE(fs::exists(dir / "o1"));
  CHECK(tool({"fit", "--outcomes", dir / "none.csv", "--adjacency", dir / "none.csv", "--covariates",
              dir / "none.csv", "--out", dir / "o2"}) == cli::kIo);
  CHECK_FALSE(fs::exists(dir / "o2"));
  CHECK(tool({"simulate", "--out"}) == cli::kValidation);
  CHECK(tool({"--help"}) == cli::kOk);
  CHECK(tool({}) == cli::kValidation);
  CHECK(tool({"simulate", "--out", dir / "o3", "--threads", "0"}) == cli::kValidation);

  // isolated sub-region: rejected before sampling
  const auto outcomes = dir.file("o.csv", "biopsy_id,node,y\nb1,0,0.1\nb1,1,0.4\nb1,2,0\n");
  const auto adjacency = dir.file("a.csv", "biopsy_id,node_a,node_b\nb1,0,1\n");
  const auto covariates = dir.file("x.csv", "biopsy_id,z\nb1,-1\n");
  CHECK(tool({"fit", "--outcomes", outcomes, "--adjacency", adjacency, "--covariates", covariates, "--out",
              dir / "o4"}) == cli::kValidation);
  CHECK_FALSE(fs::exists(dir / "o4"));

  // a too-short trace is a validation error for diagnose
  const auto trace = dir.file("t.csv", "iteration,loglik\n1,0.5\n2,0.7\n");
  CHECK(tool({"diagnose", "--trace", trace, "--out", dir / "o5"}) == cli::kValidation);

  // expression with one sample
  const auto expr = dir.file("e.csv", "gene,group,s1\ng1,a,1\ng2,a,2\n");
  CHECK(tool({"preprocess", "--expression", expr, "--out", dir / "o6"}) == cli::kValidation);
  CHECK_FALSE(fs::exists(dir / "o6"));
}

TEST_CASE("hsm-fit drops an immune-free biopsy and replays exactly") {
  TempDir dir;
  const auto cells = dir.file("cells.csv", cells_csv());
  const auto cfg = dir.file("h.json", R"({"iterations": 400, "burn_in": 200})");
  REQUIRE(tool({"hsm-fit", "--cells", cells, "--config", cfg, "--out", dir / "hsm"}) == 0);
  const auto sub = io::read_csv(dir / "hsm/subregions.csv");
  std::set<std::string> ids;
  for (const auto& r : sub.rows) ids.insert(r[0]);
  CHECK(ids == std::set<std::string>{"A", "C"});
  const auto dropped = io::read_csv(dir / "hsm/dropped.csv");
  REQUIRE(dropped.rows.size() == 1);
  CHECK(dropped.rows[0][0] == "B");

  // subregions and adjacency feed straight back into the outcome readers
  const auto outcomes = io::read_outcomes(dir / "hsm/subregions.csv");
  const auto adj = io::read_adjacency(dir / "hsm/adjacency.csv");
  for (const auto& [id, y] : outcomes) {
    CAPTURE(id);
    CHECK(y.size() == 9);
    CHECK(adj.at(id).size() == 12);  // rook edges of a full 3 x 3 grid
  }

  REQUIRE(tool({"--from-manifest", dir / "hsm/manifest.json", "--out", dir / "again"}) == 0);
  CHECK(io::read_text(dir / "hsm/subregions.csv") == io::read_text(dir / "again/subregions.csv"));
}

TEST_CASE("preprocess merges the chain toy into one covariate") {
  TempDir dir;
  const auto expr =
      dir.file("e.csv", "gene,group,s1,s2,s3,s4,s5\ng1,a,1,2,3,4,5\ng2,a,1.1,2.3,2.9,4.2,5.1\ng3,a,1.3,2.6,2.7,4.5,5.0\n");
  REQUIRE(tool({"preprocess", "--expression", expr, "--out", dir / "p"}) == 0);
  const auto cov = io::read_csv(dir / "p/covariates.csv");
  CHECK(cov.header == std::vector<std::string>{"biopsy_id", "a_1"});
  CHECK(cov.rows.size() == 5);
  CHECK(cov.number(0, 1) == doctest::Approx((1 + 1.1 + 1.3) / 3));
  const auto sets = config::read_json(dir / "p/sets.json");
  CHECK(sets["sets"][0]["genes"].size() == 3);
}

TEST_CASE("evaluate emits comparison tables") {
  TempDir dir;
  const auto cfg = dir.file("e.json", R"({
    "setting": {"n_biopsies": 12, "p": 9, "rows": 2, "cols": 2},
    "replicates": 2,
    "fit": {"iterations": 200, "burn_in": 100, "thin": 1}
  })");
  REQUIRE(tool({"evaluate", "--config", cfg, "--seed", "3", "--out", dir / "ev", "--threads", "2"}) == 0);
  const auto agg = io::read_csv(dir / "ev/aggregate.csv");
  CHECK(agg.header == std::vector<std::string>{"metric", "kind", "size", "dreamespase", "nsds", "analyst"});
  int tpr_rows = 0;
  for (const auto& r : agg.rows) tpr_rows += r[0] == "tpr";
  CHECK(tpr_rows == 6);
  CHECK(io::read_csv(dir / "ev/calibration.csv").rows.size() == 2);
  const auto reps = io::read_csv(dir / "ev/replicates.csv");
  CHECK(reps.header.back() == "value");

  REQUIRE(tool({"--from-manifest", dir / "ev/manifest.json", "--out", dir / "ev1", "--threads", "1"}) == 0);
  CHECK(io::read_text(dir / "ev/aggregate.csv") == io::read_text(dir / "ev1/aggregate.csv"));
  CHECK(io::read_text(dir / "ev/scores.csv") == io::read_text(dir / "ev1/scores.csv"));
}
