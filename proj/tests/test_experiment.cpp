#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sblab/experiment.hpp"
#include "sblab/layout_io.hpp"
#include "test_support.hpp"

using namespace sblab;
using sblab::testing::data_path;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream f(path);
    REQUIRE(f.good());
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

size_t count_lines(const std::string& text) {
    size_t n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

fs::path fresh_dir(const char* name) {
    fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("station filter syntax") {
    SoundboardLayout layout = build_layout(data_path("dulcken_layout.txt"));
    CHECK(filter_stations(layout, "").size() == 104);
    CHECK(filter_stations(layout, "8").size() == 52);
    CHECK(filter_stations(layout, "4:1-10").size() == 10);
    CHECK(filter_stations(layout, "8:26").size() == 1);
    CHECK(filter_stations(layout, "8:1-4,4:1-4").size() == 8);
}

TEST_CASE("desk-scale layout halves the grid") {
    SoundboardLayout full = build_layout(data_path("dulcken_layout.txt"));
    SoundboardLayout desk = rescale_layout(full, 2);
    CHECK(desk.grid.nx == 36);
    CHECK(desk.grid.ny == 89);
    CHECK(desk.grid.dx == doctest::Approx(0.02));
    CHECK(desk.stations.size() == full.stations.size());
    for (const StringStation& st : desk.stations)
        CHECK(desk.mask[static_cast<size_t>(st.node)] == 1);
}

TEST_CASE("two-target aging run on the small test layout") {
    fs::path out = fresh_dir("sblab_test_aging");
    ExperimentSpec spec = load_experiment_spec(data_path("test_small.cfg"));
    spec.out_dir = out.string();
    spec.jobs = 2;

    AgingArtifacts artifacts;
    Report report = run_aging_experiment(spec, &artifacts);
    CHECK(report.exit_code == 0);
    REQUIRE(artifacts.metrics_per_target.size() == 2);

    // Counting contract: 10 stations x 2 targets.
    size_t wavs = 0;
    for (const auto& entry : fs::directory_iterator(out))
        if (entry.path().extension() == ".wav") ++wavs;
    CHECK(wavs == 20);

    std::string metrics = slurp(out / "metrics.csv");
    CHECK(count_lines(metrics) == 21); // header + 20 rows

    std::string delta = slurp(out / "delta_centroid.csv");
    CHECK(count_lines(delta) == 11); // header + 10 stations

    // The report lists a terminal status per station and damping case.
    std::string manifest = slurp(out / "manifest.csv");
    CHECK(count_lines(manifest) == 21);
    for (const auto& metrics_rows : artifacts.metrics_per_target)
        for (const MetricsRow& row : metrics_rows) CHECK(row.ok);

    SUBCASE("rerun is byte-identical") {
        fs::path out2 = fresh_dir("sblab_test_aging_rerun");
        ExperimentSpec spec2 = spec;
        spec2.out_dir = out2.string();
        spec2.jobs = 1; // parallelism must not change artifacts
        run_aging_experiment(spec2);
        CHECK(slurp(out2 / "metrics.csv") == metrics);
        CHECK(slurp(out2 / "delta_centroid.csv") == delta);
    }
}

TEST_CASE("statics experiment toggle matrix on the small layout") {
    fs::path out = fresh_dir("sblab_test_statics");
    ExperimentSpec spec = load_experiment_spec(data_path("test_small.cfg"));
    spec.out_dir = out.string();

    StaticsArtifacts artifacts;
    Report report = run_statics_experiment(spec, &artifacts);
    CHECK(report.exit_code == 0);
    REQUIRE(artifacts.case_names.size() == 4);
    CHECK(fs::exists(out / "string_forces.csv"));
    CHECK(fs::exists(out / "statics_summary.csv"));
    CHECK(count_lines(slurp(out / "statics_summary.csv")) == 5);
    for (const StaticResult& res : artifacts.results) CHECK(res.converged);
}

TEST_CASE("thickness dump and analyze round trip") {
    fs::path out = fresh_dir("sblab_test_thickness");
    ExperimentSpec spec = load_experiment_spec(data_path("test_small.cfg"));
    spec.out_dir = out.string();
    Report report = run_thickness_dump(spec);
    CHECK(report.exit_code == 0);
    CHECK(fs::exists(out / "thickness_map.csv"));

    spec.stations_filter = "8:1";
    Report sim = run_single_simulation(spec);
    CHECK(sim.exit_code == 0);

    Report analyzed = run_analyze(spec, out.string());
    CHECK(analyzed.exit_code == 0);
    CHECK(fs::exists(out / "analyzed_metrics.csv"));
}
