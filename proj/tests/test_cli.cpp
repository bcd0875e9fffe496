#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"
#include "manakov/cli.hpp"

using namespace manakov;
using namespace manakov::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::path(MANAKOV_TEST_DIR) / "cli_scratch";
    fs::create_directories(dir);
    return dir / name;
}

fs::path write_config(const std::string& name, const std::string& body) {
    const auto p = scratch(name);
    std::ofstream(p) << body;
    return p;
}

int run(const std::string& args) {
    const std::string cmd = std::string(MANAKOV_BIN) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

const char* kCanonical = R"({"a": [1, 2, 3, 4], "b": [1, 4, 9, 16], "seed": 1, "t_end": 1.0, "dt": 0.001, "stride": 100})";

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("config parsing") {
        const auto cfg = parse_config(json::parse(kCanonical));
        CHECK(cfg.inertia.c(0, 1) == doctest::Approx(3));
        CHECK(cfg.stride == 100);
        double nrm = 0;
        for (double x : cfg.l0.v) nrm += x * x;
        CHECK(nrm == doctest::Approx(1.0));
        CHECK(parse_config(json::parse(kCanonical), 7).seed == 7);
        CHECK(parse_config(json::parse(kCanonical), 7).l0.v != cfg.l0.v);

        auto j = json::parse(kCanonical);
        j["l0"] = {1, 0, 0, 0, 0, 2};
        CHECK(parse_config(j).l0.v == testing::equilibrium().v);
        j["c"] = {{0, 1, 2, 3}, {1, 0, 4, 5}, {2, 4, 0, 6}, {3, 5, 6, 0}};
        CHECK(parse_config(j).inertia.c(2, 3) == 6);
        CHECK_FALSE(parse_config(j).inertia.manakov);

        const std::vector<std::string> bad{
            R"([1, 2])",
            R"({"b": [1, 4, 9, 16]})",
            R"({"a": [1, 2, 2, 4], "b": [1, 4, 9, 16]})",
            R"({"a": [1, 2, 3], "b": [1, 4, 9, 16]})",
            R"({"a": [1, 2, 3, 4], "b": [1, 4, 9, "x"]})",
            R"({"a": [1, 2, 3, 4], "b": [1, 4, 9, 16], "dt": -1})",
            R"({"a": [1, 2, 3, 4], "b": [1, 4, 9, 16], "method": "euler"})",
            R"({"a": [1, 2, 3, 4], "b": [1, 4, 9, 16], "tolerances": {"nonsense": 1}})",
            R"({"a": [1, 2, 3, 4], "c": [[0, 1, 2, 3], [2, 0, 4, 5], [2, 4, 0, 6], [3, 5, 6, 0]]})",
        };
        for (const auto& b : bad) CHECK_THROWS_AS(parse_config(json::parse(b)), ConfigError);
    }

    TEST_CASE("17 significant digits") {
        CHECK(num(0.1) == "0.10000000000000001");
        CHECK(std::stod(num(1.0 / 3)) == 1.0 / 3);
    }

    TEST_CASE("config failures exit with 2") {
        const auto good = write_config("good.json", kCanonical);
        CHECK(run("simulate --config " + scratch("missing.json").string()) == 2);
        CHECK(run("simulate --config " + write_config("broken.json", "{not json").string()) == 2);
        CHECK(run("simulate --config " + write_config("dup.json", R"({"a": [1, 1, 3, 4], "b": [1, 4, 9, 16]})").string()) == 2);
        CHECK(run("verify --config " + good.string()) == 2);
        CHECK(run("verify --config " + good.string() + " --suite nope") == 2);
        CHECK(run("explode --config " + good.string()) == 2);
        CHECK(run("simulate") == 2);
    }

    TEST_CASE("simulate is deterministic and conservative") {
        const auto cfg = write_config("sim.json", kCanonical);
        const auto o1 = scratch("sim1.csv"), o2 = scratch("sim2.csv"), o3 = scratch("sim3.csv");
        REQUIRE(run("simulate --config " + cfg.string() + " --out " + o1.string()) == 0);
        REQUIRE(run("simulate --config " + cfg.string() + " --out " + o2.string()) == 0);
        REQUIRE(run("simulate --config " + cfg.string() + " --seed 9 --out " + o3.string()) == 0);
        const auto text = slurp(o1);
        CHECK(text == slurp(o2));
        CHECK(text != slurp(o3));
        std::istringstream is(text);
        std::string line;
        std::getline(is, line);
        CHECK(line == "t,l12,l13,l14,l23,l24,l34,H0,H1,H2,H3");
        std::vector<std::vector<double>> rows;
        while (std::getline(is, line)) {
            std::vector<double> r;
            std::stringstream ls(line);
            for (std::string cell; std::getline(ls, cell, ',');) r.push_back(std::stod(cell));
            REQUIRE(r.size() == 11);
            rows.push_back(r);
        }
        CHECK(rows.size() == 11);
        const double sc = std::max({std::abs(rows[0][7]), rows[0][8], rows[0][9], rows[0][10]});
        for (const auto& r : rows)
            for (int k = 7; k < 11; ++k) CHECK(std::abs(r[k] - rows[0][k]) < 1e-8 * sc);
    }

    TEST_CASE("equilibrium simulate gives constant columns") {
        auto j = json::parse(kCanonical);
        j["l0"] = {1, 0, 0, 0, 0, 2};
        const auto cfg = write_config("eq.json", j.dump());
        const auto out = scratch("eq.csv");
        REQUIRE(run("simulate --config " + cfg.string() + " --out " + out.string()) == 0);
        std::istringstream is(slurp(out));
        std::string line, first;
        std::getline(is, line);
        std::getline(is, first);
        first = first.substr(first.find(','));
        while (std::getline(is, line)) CHECK(line.substr(line.find(',')) == first);
    }

    TEST_CASE("verify reports") {
        auto j = json::parse(kCanonical);
        j["t_end"] = 20.0;
        const auto cfg = write_config("verify.json", j.dump());
        const auto out = scratch("inv.json");
        CHECK(run("verify --config " + cfg.string() + " --suite invariants --out " + out.string()) == 0);
        const auto rep = json::parse(slurp(out));
        CHECK(rep.at("pass").get<bool>());
        for (const auto& c : rep.at("checks"))
            for (const char* k : {"check", "residual", "threshold", "pass"}) CHECK(c.contains(k));

        j["c"] = {{0, 2.5, 7.1, 1.3}, {2.5, 0, 3.3, 5.9}, {7.1, 3.3, 0, 4.4}, {1.3, 5.9, 4.4, 0}};
        const auto bad = write_config("nonmanakov.json", j.dump());
        const auto bad_out = scratch("inv_bad.json");
        CHECK(run("verify --config " + bad.string() + " --suite invariants --out " + bad_out.string()) == 3);
        std::map<std::string, bool> pass;
        const auto bad_rep = json::parse(slurp(bad_out));
        for (const auto& c : bad_rep.at("checks")) pass[c.at("check").get<std::string>()] = c.at("pass").get<bool>();
        CHECK(pass["drift_H0"]);
        CHECK(pass["drift_H1"]);
        const bool both = pass["drift_H2"] && pass["drift_H3"];
        CHECK_FALSE(both);

        j = json::parse(kCanonical);
        j["identity_samples"] = 100;
        const auto ids = write_config("ids.json", j.dump());
        CHECK(run("verify --config " + ids.string() + " --suite identities --out " + scratch("ids_out.json").string()) == 0);
        CHECK(run("verify --config " + ids.string() + " --suite lax --out " + scratch("lax_out.json").string()) == 0);
        CHECK(run("verify --config " + ids.string() + " --suite quadrics --out " + scratch("quad_out.json").string()) == 0);
    }

    TEST_CASE("uniformize writes the series and the sidecar") {
        const auto cfg = write_config("uni.json", kCanonical);
        const auto out = scratch("uni.csv");
        REQUIRE(run("uniformize --config " + cfg.string() + " --out " + out.string()) == 0);
        std::istringstream is(slurp(out));
        std::string line;
        std::getline(is, line);
        CHECK(line == "t,z1_re,z1_im,z2_re,z2_im,u1_re,u1_im,u2_re,u2_im");
        int rows = 0;
        while (std::getline(is, line)) ++rows;
        CHECK(rows == 50);
        const auto side = json::parse(slurp(out.string() + ".json"));
        CHECK(side.at("pass").get<bool>());
        CHECK(side.at("residual").get<double>() < 1e-6);
        CHECK(side.at("v").size() == 2);
    }
}
