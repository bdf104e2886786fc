#include "rflow/rflow.h"

#include "rflow/driver.hpp"
#include "rflow/error.hpp"
#include "rflow/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <new>
#include <sstream>

struct rflow_case {
    rflow::CaseConfig config;
};

struct rflow_sim {
    std::unique_ptr<rflow::Simulation> sim;
};

namespace {

thread_local std::string lastError;

// Thrown by the run callback to stop the loop early.
struct StopRequested {};

template <class F>
rflow_status guard(F&& f) {
    try {
        f();
        return RFLOW_OK;
    } catch (const rflow::ParseError& e) {
        lastError = e.what();
        return RFLOW_ERR_PARSE;
    } catch (const rflow::InvalidArgument& e) {
        lastError = e.what();
        return RFLOW_ERR_INVALID_ARGUMENT;
    } catch (const rflow::IoError& e) {
        lastError = e.what();
        return RFLOW_ERR_IO;
    } catch (const rflow::FormatError& e) {
        lastError = e.what();
        return RFLOW_ERR_FORMAT;
    } catch (const rflow::ConvergenceError& e) {
        lastError = e.what();
        return RFLOW_ERR_CONVERGENCE;
    } catch (const std::bad_alloc&) {
        lastError = "out of memory";
        return RFLOW_ERR_INTERNAL;
    } catch (const std::exception& e) {
        lastError = e.what();
        return RFLOW_ERR_INTERNAL;
    }
}

void require(const void* p, const char* what) {
    if (!p) throw rflow::InvalidArgument(std::string(what) + " must not be NULL");
}

// Caller-buffer text output.
rflow_status copyText(const std::string& s, char* buf, size_t len, size_t* needed) {
    if (needed) *needed = s.size();
    if (!buf || len < s.size() + 1) {
        if (buf && len > 0) buf[0] = '\0';
        lastError = "buffer too small: need " + std::to_string(s.size() + 1) + " bytes";
        return RFLOW_ERR_BUFFER;
    }
    std::memcpy(buf, s.c_str(), s.size() + 1);
    return RFLOW_OK;
}

rflow_step_info stepInfo(const rflow::StepReport& r) {
    rflow_step_info i{};
    i.time = r.time;
    i.dt = r.dt;
    i.max_co = r.maxCo;
    i.continuity_residual = r.continuityResidual;
    i.pressure_tolerance = r.pressureTolerance;
    i.pressure_iterations = r.pressureIterations;
    i.seconds_total = r.timings.total;
    i.seconds_chemistry = r.timings.chemistry;
    return i;
}

std::string describeCase(const rflow::CaseConfig& c) {
    rflow::Simulation sim(c);
    const auto& m = sim.mesh().cells;
    const rflow::Vec3 len = c.boxLengths();
    std::ostringstream os;
    os << "case " << c.source << "\n";
    os << "mesh " << m.dims[0] << " x " << m.dims[1] << " x " << m.dims[2] << " (" << m.nCells << " cells), box "
       << len[0] << " x " << len[1] << " x " << len[2] << " m\n";
    os << "time dt " << c.dt << " s, endTime " << c.endTime << " s, " << c.stepCount() << " steps, writeInterval "
       << c.writeInterval << "\n";
    os << "schemes ddt " << toString(c.piso.ddt) << ", div.U " << toString(c.piso.divMomentum) << ", div.scalar "
       << toString(c.piso.divScalar) << "; " << c.piso.nCorrectors << " correctors\n";
    os << "chemistry " << toString(c.piso.chemistryMode) << ", mechanism " << c.mechanismPath << " ("
       << sim.mechanism().nSpecies() << " species, " << sim.mechanism().reactions().size()
       << (sim.mechanism().reactions().size() == 1 ? " reaction)\n" : " reactions)\n");
    os << "init " << (c.init.twoD ? "tgv2d" : "tgv") << (c.init.reactive ? " reactive" : "") << ", u0 " << c.init.u0
       << " m/s, L " << c.init.L << " m, T " << c.init.T << " K, p " << c.init.p << " Pa\n";
    os << "Re " << sim.reynolds() << "\n";
    return os.str();
}

std::string describeMechanism(const std::string& path) {
    const rflow::Mechanism mech = rflow::parseMechanism(path);
    const rflow::Mixture& mix = mech.mixture();
    std::ostringstream os;
    os << "mechanism " << path << "\n" << mix.nSpecies() << " species:";
    for (std::size_t k = 0; k < mix.nSpecies(); ++k)
        os << " " << mix.species(k).name << (mech.isInert(k) ? "(inert)" : "");
    os << "\nelements:";
    for (const auto& e : mech.elements()) os << " " << e;
    os << "\nvalid T range " << mix.Tmin() << " - " << mix.Tmax() << " K\n" << mech.reactions().size()
       << (mech.reactions().size() == 1 ? " reaction:\n" : " reactions:\n");
    for (const auto& r : mech.reactions()) os << "  " << rflow::reactionEquation(r, mix) << "\n";
    return os.str();
}

std::string describeWeights(const std::string& path) {
    const rflow::SurrogateBundle b = rflow::loadWeights(path);
    std::ostringstream os;
    os << "surrogate weights " << path << "\n" << b.networks.size() << " networks, input dim " << b.inputDim() << "\n";
    for (std::size_t s = 0; s < b.networks.size(); ++s) {
        const auto& net = b.networks[s];
        os << "  " << b.species[s] << ": " << net.inputDim();
        for (const auto& l : net.layers()) os << "-" << l.outDim;
        os << ", " << net.parameterCount() << " parameters\n";
    }
    return os.str();
}

} // namespace

extern "C" {

const char* rflow_version(void) { return "0.1.0"; }

const char* rflow_status_string(rflow_status s) {
    switch (s) {
        case RFLOW_OK:                   return "ok";
        case RFLOW_ERR_INVALID_ARGUMENT: return "invalid argument";
        case RFLOW_ERR_PARSE:            return "parse error";
        case RFLOW_ERR_IO:               return "i/o error";
        case RFLOW_ERR_FORMAT:           return "format error";
        case RFLOW_ERR_CONVERGENCE:      return "convergence failure";
        case RFLOW_ERR_BUFFER:           return "buffer too small";
        case RFLOW_ERR_INTERNAL:         return "internal error";
    }
    return "unknown status";
}

const char* rflow_last_error(void) { return lastError.c_str(); }

rflow_status rflow_case_load(const char* path, rflow_case** out) {
    return guard([&] {
        require(path, "path");
        require(out, "out");
        *out = nullptr;
        auto c = std::make_unique<rflow_case>();
        c->config = rflow::parseCase(path);
        *out = c.release();
    });
}

void rflow_case_free(rflow_case* c) { delete c; }

rflow_status rflow_case_emit(const rflow_case* c, char* buf, size_t len, size_t* needed) {
    std::string text;
    rflow_status st = guard([&] {
        require(c, "case");
        text = rflow::emitCase(c->config);
    });
    return st == RFLOW_OK ? copyText(text, buf, len, needed) : st;
}

rflow_status rflow_sim_create(const rflow_case* c, rflow_sim** out) {
    return guard([&] {
        require(c, "case");
        require(out, "out");
        *out = nullptr;
        auto s = std::make_unique<rflow_sim>();
        s->sim = std::make_unique<rflow::Simulation>(c->config);
        *out = s.release();
    });
}

void rflow_sim_free(rflow_sim* s) { delete s; }

rflow_status rflow_sim_step(rflow_sim* s, rflow_step_info* info) {
    return guard([&] {
        require(s, "sim");
        const rflow::StepReport r = s->sim->step(s->sim->config().dt);
        if (info) *info = stepInfo(r);
    });
}

rflow_status rflow_sim_cells(const rflow_sim* s, uint64_t* cells) {
    return guard([&] {
        require(s, "sim");
        require(cells, "cells");
        *cells = s->sim->mesh().nCells();
    });
}

rflow_status rflow_sim_reynolds(const rflow_sim* s, double* re) {
    return guard([&] {
        require(s, "sim");
        require(re, "re");
        *re = s->sim->reynolds();
    });
}

rflow_status rflow_sim_field(const rflow_sim* s, const char* name, double* buf, size_t len, size_t* needed) {
    rflow_status st = RFLOW_OK;
    rflow_status g = guard([&] {
        require(s, "sim");
        require(name, "name");
        const rflow::SimulationState& state = s->sim->state();
        const std::string n = name;
        const rflow::CellField* f = nullptr;
        std::size_t comp = 0, count = 0;
        if (n == "U") f = &state.U, count = 3;
        else if (n == "p") f = &state.p, count = 1;
        else if (n == "T") f = &state.T, count = 1;
        else if (n == "rho") f = &state.rho, count = 1;
        else if (n == "h") f = &state.h, count = 1;
        else if (n.rfind("Y_", 0) == 0) {
            f = &state.Y;
            comp = s->sim->mechanism().mixture().index(n.substr(2));
            count = 1;
        } else {
            throw rflow::InvalidArgument("unknown field '" + n + "'");
        }
        const std::size_t cells = state.mesh->nCells(), total = count * cells;
        if (needed) *needed = total;
        if (!buf || len < total) {
            lastError = "buffer too small: need " + std::to_string(total) + " doubles";
            st = RFLOW_ERR_BUFFER;
            return;
        }
        std::memcpy(buf, f->data.data() + comp * cells, total * sizeof(double));
    });
    return g != RFLOW_OK ? g : st;
}

rflow_status rflow_sim_kinetic_energy(const rflow_sim* s, double* ke) {
    return guard([&] {
        require(s, "sim");
        require(ke, "ke");
        *ke = rflow::kineticEnergy(s->sim->state());
    });
}

rflow_status rflow_sim_max_temperature(const rflow_sim* s, double* t) {
    return guard([&] {
        require(s, "sim");
        require(t, "t");
        *t = rflow::maxTemperature(s->sim->state());
    });
}

rflow_status rflow_sim_write_vtk(const rflow_sim* s, const char* path) {
    return guard([&] {
        require(s, "sim");
        require(path, "path");
        rflow::writeVtk(std::string(path), s->sim->state(), s->sim->mechanism().mixture(), "rflow state");
    });
}

void rflow_run_options_init(rflow_run_options* o) {
    if (!o) return;
    o->output_dir = ".";
    o->write_vtk = 1;
    o->on_step = nullptr;
    o->user = nullptr;
}

rflow_status rflow_run(const rflow_case* c, const rflow_run_options* o, uint64_t* steps) {
    std::size_t done = 0;
    rflow_status st = guard([&] {
        require(c, "case");
        rflow_run_options def;
        rflow_run_options_init(&def);
        const rflow_run_options& opt = o ? *o : def;
        rflow::Simulation sim(c->config);
        rflow::RunOptions ro;
        ro.outputDir = opt.output_dir ? opt.output_dir : ".";
        ro.writeVtk = opt.write_vtk != 0;
        ro.onStep = [&](const rflow::StepReport& r) {
            ++done;
            if (opt.on_step) {
                const rflow_step_info info = stepInfo(r);
                if (!opt.on_step(&info, opt.user)) throw StopRequested{};
            }
        };
        try {
            rflow::run(sim, ro);
        } catch (const StopRequested&) {
        }
    });
    if (steps) *steps = done;
    return st;
}

rflow_status rflow_bench(const rflow_case* c, uint64_t steps, rflow_bench_result* out) {
    return guard([&] {
        require(c, "case");
        require(out, "out");
        rflow::Simulation sim(c->config);
        const rflow::BenchReport r = rflow::bench(sim, steps);
        out->steps = r.steps;
        out->cells = r.cells;
        std::snprintf(out->chemistry_mode, sizeof out->chemistry_mode, "%s", r.chemistryMode.c_str());
        out->discretisation = r.perStep(r.total.discretisation);
        out->linear_solve = r.perStep(r.total.linearSolve);
        out->chemistry = r.perStep(r.total.chemistry);
        out->thermo = r.perStep(r.total.thermo);
        out->sum = r.perStep(r.total.sum());
        out->total = r.perStep(r.total.total);
        out->fluid = r.perStep(r.fluid());
    });
}

rflow_status rflow_bench_format(const rflow_bench_result* r, char* buf, size_t len, size_t* needed) {
    std::string text;
    rflow_status st = guard([&] {
        require(r, "result");
        rflow::BenchReport b;
        b.steps = r->steps;
        b.cells = r->cells;
        b.chemistryMode = std::string(r->chemistry_mode, strnlen(r->chemistry_mode, sizeof r->chemistry_mode));
        const double n = static_cast<double>(r->steps);
        b.total.discretisation = r->discretisation * n;
        b.total.linearSolve = r->linear_solve * n;
        b.total.chemistry = r->chemistry * n;
        b.total.thermo = r->thermo * n;
        b.total.total = r->total * n;
        std::ostringstream os;
        rflow::writeBenchReport(os, b);
        text = os.str();
    });
    return st == RFLOW_OK ? copyText(text, buf, len, needed) : st;
}

void rflow_sample_options_init(rflow_sample_options* o) {
    if (!o) return;
    o->n = 10000;
    o->dt = 1e-5;
    o->t_min = 900.0;
    o->t_max = 1500.0;
    o->p = 101325.0;
    o->seed = 1;
}

rflow_status rflow_sample_chemistry(const char* mechanism_path, const rflow_sample_options* o, const char* out_path) {
    return guard([&] {
        require(mechanism_path, "mechanism_path");
        require(out_path, "out_path");
        rflow_sample_options def;
        rflow_sample_options_init(&def);
        const rflow_sample_options& opt = o ? *o : def;
        if (opt.n == 0) throw rflow::InvalidArgument("sample count must be positive");
        if (!(opt.dt > 0.0)) throw rflow::InvalidArgument("dt must be positive");
        const rflow::Mechanism mech = rflow::parseMechanism(mechanism_path);
        rflow::SamplerConfig sc;
        sc.Tmin = opt.t_min;
        sc.Tmax = opt.t_max;
        sc.p = opt.p;
        sc.seed = opt.seed;
        const rflow::SampleTable t = rflow::generateSamples(mech, sc, opt.dt, opt.n);
        rflow::writeSampleTable(std::string(out_path), t);
    });
}

void rflow_train_options_init(rflow_train_options* o) {
    if (!o) return;
    o->hidden = nullptr;
    o->n_hidden = 0;
    o->epochs = 200;
    o->batch_size = 64;
    o->learning_rate = 1e-3;
    o->final_learning_rate_fraction = 0.05;
    o->seed = 1;
    o->species = nullptr;
}

rflow_status rflow_train_surrogate(const char* samples_path, const rflow_train_options* o, const char* out_path,
                                   double* final_loss, size_t final_loss_len, size_t* n_networks) {
    return guard([&] {
        require(samples_path, "samples_path");
        require(out_path, "out_path");
        rflow_train_options def;
        rflow_train_options_init(&def);
        const rflow_train_options& opt = o ? *o : def;
        const rflow::SampleTable table = rflow::readSampleTable(std::string(samples_path));
        std::vector<std::size_t> hidden{64, 32, 16};
        if (opt.hidden) hidden.assign(opt.hidden, opt.hidden + opt.n_hidden);
        std::vector<std::string> species;
        if (opt.species) {
            std::istringstream in(opt.species);
            for (std::string w; in >> w;) species.push_back(w);
        } else {
            // Projection roundoff leaves inert columns at ~1e-9 of the
            // reacting scale, so activity is judged relative to the largest rate.
            const std::size_t ns = table.species.size();
            std::vector<double> peak(ns, 0.0);
            for (const auto& row : table.rows)
                for (std::size_t k = 0; k < ns; ++k) peak[k] = std::max(peak[k], std::abs(row[2 + ns + k]));
            const double top = *std::max_element(peak.begin(), peak.end());
            for (std::size_t k = 0; k < ns; ++k)
                if (peak[k] > 1e-6 * top) species.push_back(table.species[k]);
        }
        if (species.empty()) throw rflow::InvalidArgument("no species with nonzero rates to train");
        rflow::TrainerConfig cfg;
        cfg.epochs = opt.epochs;
        cfg.batchSize = opt.batch_size;
        cfg.learningRate = opt.learning_rate;
        cfg.finalLearningRateFraction = opt.final_learning_rate_fraction;
        cfg.seed = opt.seed;
        std::vector<rflow::TrainResult> history;
        const rflow::SurrogateBundle b = rflow::trainSurrogate(table, species, hidden, cfg, &history);
        rflow::saveWeights(std::string(out_path), b);
        if (n_networks) *n_networks = b.networks.size();
        if (final_loss)
            for (std::size_t s = 0; s < history.size() && s < final_loss_len; ++s)
                final_loss[s] = history[s].lossHistory.empty() ? 0.0 : history[s].lossHistory.back();
    });
}

rflow_status rflow_info(const char* path, char* buf, size_t len, size_t* needed) {
    std::string text;
    rflow_status st = guard([&] {
        require(path, "path");
        std::ifstream in(path, std::ios::binary);
        if (!in) throw rflow::IoError(std::string("cannot open '") + path + "'");
        std::ostringstream all;
        all << in.rdbuf();
        const std::string content = all.str();
        if (content.rfind("MFNN", 0) == 0) text = describeWeights(path);
        else if (content.find("[species") != std::string::npos) text = describeMechanism(path);
        else text = describeCase(rflow::parseCase(path));
    });
    return st == RFLOW_OK ? copyText(text, buf, len, needed) : st;
}

} // extern "C"
