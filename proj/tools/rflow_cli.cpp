// Command-line front end. Uses only the C API in rflow.h.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.
#include "rflow/rflow.h"

#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

namespace {

int fail(const char* what, rflow_status s) {
    std::fprintf(stderr, "rflow: %s: %s: %s\n", what, rflow_status_string(s), rflow_last_error());
    return s == RFLOW_ERR_INVALID_ARGUMENT ? 2 : 1;
}

// Reads a caller-buffer text result, growing the buffer once.
template <class F>
rflow_status text(F&& f, std::string& out) {
    size_t needed = 0;
    std::vector<char> buf(4096);
    rflow_status s = f(buf.data(), buf.size(), &needed);
    if (s == RFLOW_ERR_BUFFER) {
        buf.resize(needed + 1);
        s = f(buf.data(), buf.size(), &needed);
    }
    if (s == RFLOW_OK) out.assign(buf.data(), needed);
    return s;
}

struct CaseHandle {
    rflow_case* c = nullptr;
    ~CaseHandle() { rflow_case_free(c); }
};

int cmdRun(const std::string& path, const std::string& output, bool noVtk, bool quiet) {
    CaseHandle h;
    if (rflow_status s = rflow_case_load(path.c_str(), &h.c)) return fail("loading case", s);
    rflow_run_options o;
    rflow_run_options_init(&o);
    o.output_dir = output.c_str();
    o.write_vtk = noVtk ? 0 : 1;
    o.user = &quiet;
    o.on_step = [](const rflow_step_info* i, void* user) -> int {
        if (!*static_cast<bool*>(user))
            std::printf("t %.6e  dt %.3e  Co %.4f  continuity %.3e  p-iters %llu  %.3f s\n", i->time, i->dt,
                        i->max_co, i->continuity_residual, static_cast<unsigned long long>(i->pressure_iterations),
                        i->seconds_total);
        return 1;
    };
    uint64_t steps = 0;
    if (rflow_status s = rflow_run(h.c, &o, &steps)) return fail("run", s);
    std::printf("completed %llu steps, output in %s\n", static_cast<unsigned long long>(steps), output.c_str());
    return 0;
}

int cmdBench(const std::string& path, uint64_t steps) {
    CaseHandle h;
    if (rflow_status s = rflow_case_load(path.c_str(), &h.c)) return fail("loading case", s);
    rflow_bench_result r;
    if (rflow_status s = rflow_bench(h.c, steps, &r)) return fail("bench", s);
    std::string report;
    if (rflow_status s = text(
            [&](char* b, size_t n, size_t* need) { return rflow_bench_format(&r, b, n, need); }, report))
        return fail("formatting bench report", s);
    std::fputs(report.c_str(), stdout);
    return 0;
}

int cmdInfo(const std::string& path) {
    std::string out;
    if (rflow_status s = text([&](char* b, size_t n, size_t* need) { return rflow_info(path.c_str(), b, n, need); },
                              out))
        return fail("info", s);
    std::fputs(out.c_str(), stdout);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"rflow: low-Mach reactive flow solver with neural chemistry surrogates"};
    app.set_version_flag("--version", std::string(rflow_version()));
    app.require_subcommand(1);

    std::string casePath, output = "output";
    bool noVtk = false, quiet = false;
    auto* run = app.add_subcommand("run", "Run a case to its end time, writing VTK snapshots and diagnostics.csv");
    run->add_option("case", casePath, "Case file (.cfg)")->required()->check(CLI::ExistingFile);
    run->add_option("-o,--output", output, "Output directory")->capture_default_str();
    run->add_flag("--no-vtk", noVtk, "Skip VTK snapshots, write diagnostics only");
    run->add_flag("-q,--quiet", quiet, "Do not print a line per step");

    uint64_t benchSteps = 10;
    auto* bench = app.add_subcommand("bench", "Time a number of steps and print the per-stage breakdown");
    bench->add_option("case", casePath, "Case file (.cfg)")->required()->check(CLI::ExistingFile);
    bench->add_option("--steps", benchSteps, "Steps to time")->capture_default_str()->check(CLI::PositiveNumber);

    rflow_sample_options so;
    rflow_sample_options_init(&so);
    std::string mechPath, samplesOut;
    auto* sample =
        app.add_subcommand("sample-chemistry", "Integrate random thermochemical states to build a training table");
    sample->add_option("mechanism", mechPath, "Mechanism file (.mech)")->required()->check(CLI::ExistingFile);
    sample->add_option("-o,--output", samplesOut, "Output sample table")->required();
    sample->add_option("--n", so.n, "Number of samples")->capture_default_str()->check(CLI::PositiveNumber);
    sample->add_option("--dt", so.dt, "Chemistry interval [s]")->capture_default_str()->check(CLI::PositiveNumber);
    sample->add_option("--Tmin", so.t_min, "Lowest sampled temperature [K]")->capture_default_str();
    sample->add_option("--Tmax", so.t_max, "Highest sampled temperature [K]")->capture_default_str();
    sample->add_option("--p", so.p, "Pressure [Pa]")->capture_default_str()->check(CLI::PositiveNumber);
    sample->add_option("--seed", so.seed, "Random seed")->capture_default_str();

    rflow_train_options to;
    rflow_train_options_init(&to);
    std::vector<uint64_t> arch{64, 32, 16};
    std::string samplesIn, weightsOut, species;
    auto* train = app.add_subcommand("train-surrogate", "Train one network per species on a sample table");
    train->add_option("samples", samplesIn, "Sample table from sample-chemistry")->required()->check(CLI::ExistingFile);
    train->add_option("-o,--output", weightsOut, "Output weights file")->required();
    train->add_option("--arch", arch, "Hidden layer widths")->delimiter(',')->capture_default_str();
    train->add_option("--epochs", to.epochs, "Training epochs")->capture_default_str()->check(CLI::PositiveNumber);
    train->add_option("--batch", to.batch_size, "Mini-batch size")->capture_default_str()->check(CLI::PositiveNumber);
    train->add_option("--lr", to.learning_rate, "Initial learning rate")->capture_default_str();
    train->add_option("--lr-final", to.final_learning_rate_fraction, "Final learning rate as a fraction of --lr")
        ->capture_default_str();
    train->add_option("--seed", to.seed, "Random seed")->capture_default_str();
    train->add_option("--species", species,
                      "Space-separated species to train (default: every species whose peak rate exceeds 1e-6 of the largest)");

    std::string infoPath;
    auto* info = app.add_subcommand("info", "Validate and summarise a case, mechanism or weights file");
    info->add_option("file", infoPath, "File to inspect")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (*run) return cmdRun(casePath, output, noVtk, quiet);
    if (*bench) return cmdBench(casePath, benchSteps);
    if (*info) return cmdInfo(infoPath);
    if (*sample) {
        if (rflow_status s = rflow_sample_chemistry(mechPath.c_str(), &so, samplesOut.c_str()))
            return fail("sample-chemistry", s);
        std::printf("wrote %llu samples to %s\n", static_cast<unsigned long long>(so.n), samplesOut.c_str());
        return 0;
    }
    if (*train) {
        to.hidden = arch.data();
        to.n_hidden = arch.size();
        to.species = species.empty() ? nullptr : species.c_str();
        std::vector<double> loss(256);
        size_t nets = 0;
        if (rflow_status s =
                rflow_train_surrogate(samplesIn.c_str(), &to, weightsOut.c_str(), loss.data(), loss.size(), &nets))
            return fail("train-surrogate", s);
        for (size_t i = 0; i < nets && i < loss.size(); ++i) std::printf("network %zu final loss %.6e\n", i, loss[i]);
        std::printf("wrote %zu networks to %s\n", nets, weightsOut.c_str());
        return 0;
    }
    return 2;
}
