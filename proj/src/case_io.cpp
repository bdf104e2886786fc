#include "ini.hpp"
#include "rflow/driver.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>
#include <set>
#include <sstream>

namespace rflow {

namespace {

constexpr const char* kSides[6] = {"xmin", "xmax", "ymin", "ymax", "zmin", "zmax"};

std::map<std::string, double> toMap(const std::vector<std::pair<std::string, double>>& v) {
    return {v.begin(), v.end()};
}

std::string composition(const std::map<std::string, double>& m) {
    std::string s;
    for (const auto& [k, v] : m) s += (s.empty() ? "" : " ") + k + ":" + ini::format(v);
    return s;
}

void readSolver(const ini::Reader& r, const std::string& prefix, SolverControls& c) {
    if (const ini::Entry* e = r.find(prefix + ".solver")) {
        try {
            c.kind = solverKindFromString(e->value);
        } catch (const InvalidArgument& ex) {
            r.failAt(*e, ex.what());
        }
    }
    c.absTol = r.number(prefix + ".absTol", c.absTol);
    c.relTol = r.number(prefix + ".relTol", c.relTol);
    const long it = r.integer(prefix + ".maxIter", static_cast<long>(c.maxIter));
    if (it < 1) r.failAt(r.entry(prefix + ".maxIter"), "maxIter must be positive");
    c.maxIter = static_cast<std::size_t>(it);
}

template <class E, class F>
E readEnum(const ini::Reader& r, const std::string& key, E fallback, F&& parse) {
    const ini::Entry* e = r.find(key);
    if (!e) return fallback;
    try {
        return parse(e->value);
    } catch (const InvalidArgument& ex) {
        r.failAt(*e, ex.what());
    }
}

} // namespace

std::string CaseConfig::resolve(const std::string& path) const {
    if (path.empty()) return path;
    std::filesystem::path p(path);
    if (p.is_absolute()) return path;
    return (std::filesystem::path(baseDir.empty() ? "." : baseDir) / p).lexically_normal().string();
}

Vec3 CaseConfig::boxLengths() const {
    if (lengths[0] > 0.0) return lengths;
    const double e = 2.0 * std::numbers::pi * init.L;
    // A single 2D layer is one L thick.
    return {e, e, init.twoD && dims[2] == 1 ? init.L : e};
}

std::size_t CaseConfig::stepCount() const {
    if (!(endTime > 0.0)) return 0;
    // Round to the nearest whole step; a trailing fraction below 1e-9 dt is roundoff.
    const double n = endTime / dt;
    return static_cast<std::size_t>(std::ceil(n - 1e-9));
}

void CaseConfig::validate(bool checkFiles) const {
    const std::string tag = source.empty() ? "case" : source;
    for (std::size_t d = 0; d < 3; ++d)
        if (dims[d] == 0) throw InvalidArgument(tag + ": mesh dims must be positive");
    const Vec3 len = boxLengths();
    for (double l : len)
        if (!(l > 0.0)) throw InvalidArgument(tag + ": mesh lengths must be positive");
    for (int d = 0; d < 3; ++d) {
        const bool a = patches.kinds[2 * d] == PatchKind::Periodic, b = patches.kinds[2 * d + 1] == PatchKind::Periodic;
        if (a != b)
            throw InvalidArgument(tag + ": periodic patch " + kSides[a ? 2 * d : 2 * d + 1] + " has no periodic pair " +
                                  kSides[a ? 2 * d + 1 : 2 * d]);
    }
    if (!(dt > 0.0)) throw InvalidArgument(tag + ": dt must be positive");
    if (!(endTime >= 0.0)) throw InvalidArgument(tag + ": endTime must not be negative");
    if (!(maxCo > 0.0)) throw InvalidArgument(tag + ": maxCo must be positive");
    piso.validate();
    if (mechanismPath.empty()) throw InvalidArgument(tag + ": chemistry.mechanism is required");
    if (piso.chemistryMode == ChemistryMode::Surrogate) {
        if (weightsPath.empty()) throw InvalidArgument(tag + ": surrogate mode needs chemistry.weights");
        if (!(trainingDt > 0.0)) throw InvalidArgument(tag + ": surrogate mode needs chemistry.trainingDt");
    }
    if (checkFiles) {
        if (!std::filesystem::exists(resolve(mechanismPath)))
            throw IoError(tag + ": mechanism file '" + resolve(mechanismPath) + "' does not exist");
        if (!weightsPath.empty() && piso.chemistryMode == ChemistryMode::Surrogate &&
            !std::filesystem::exists(resolve(weightsPath)))
            throw IoError(tag + ": weights file '" + resolve(weightsPath) + "' does not exist");
    }
    if (!(init.u0 >= 0.0) || !(init.L > 0.0) || !(init.T > 0.0) || !(init.p > 0.0))
        throw InvalidArgument(tag + ": init needs u0 >= 0 and positive L, T and p");
    if (init.reactive) {
        if (init.fuel.empty() || init.oxidizer.empty())
            throw InvalidArgument(tag + ": reactive init needs fuel and oxidizer compositions");
        if (!(init.width > 0.0 && init.width < 2.0)) throw InvalidArgument(tag + ": init.width must lie in (0, 2)");
        if (!(init.thickness > 0.0)) throw InvalidArgument(tag + ": init.thickness must be positive");
    } else if (init.composition.empty()) {
        throw InvalidArgument(tag + ": init.composition is required");
    }
}

CaseConfig parseCaseText(const std::string& text, const std::string& source, const std::string& baseDir) {
    const ini::Document doc = ini::parse(text, source);
    CaseConfig c;
    c.source = source;
    c.baseDir = baseDir;
    std::set<std::string> seen;
    bool haveTime = false, haveChem = false, haveInit = false;
    for (const auto& b : doc.blocks) {
        if (!seen.insert(b.name).second) ini::fail(source, b.line, 1, "duplicate block [" + b.name + "]");
        if (!b.arg.empty()) ini::fail(source, b.line, 1, "block [" + b.name + "] takes no argument");
        ini::Reader r(doc, b);
        if (b.name == "mesh") {
            const auto d = r.numbers("dims", 3);
            for (int i = 0; i < 3; ++i) {
                if (!(d[i] >= 1.0) || d[i] != std::floor(d[i])) r.failAt(r.entry("dims"), "dims must be positive integers");
                c.dims[i] = static_cast<std::size_t>(d[i]);
            }
            if (r.has("lengths")) {
                const auto l = r.numbers("lengths", 3);
                c.lengths = {l[0], l[1], l[2]};
            }
            if (const ini::Entry* e = r.find("patches")) {
                std::istringstream in(e->value);
                std::vector<std::string> w;
                for (std::string s; in >> s;) w.push_back(s);
                if (w.size() != 6) r.failAt(*e, "patches needs six kinds (xmin xmax ymin ymax zmin zmax)");
                for (int i = 0; i < 6; ++i) {
                    try {
                        c.patches.kinds[i] = patchKindFromString(w[i]);
                    } catch (const InvalidArgument& ex) {
                        r.failAt(*e, ex.what());
                    }
                }
            }
        } else if (b.name == "time") {
            haveTime = true;
            c.dt = r.number("dt");
            c.endTime = r.number("endTime");
            c.maxCo = r.number("maxCo", c.maxCo);
            c.piso.maxCo = c.maxCo;
            const long wi = r.integer("writeInterval", 0);
            if (wi < 0) r.failAt(r.entry("writeInterval"), "writeInterval must not be negative");
            c.writeInterval = static_cast<std::size_t>(wi);
        } else if (b.name == "schemes") {
            c.piso.ddt = readEnum(r, "ddt", c.piso.ddt, ddtSchemeFromString);
            c.piso.divMomentum = readEnum(r, "div.U", c.piso.divMomentum, divSchemeFromString);
            c.piso.divScalar = readEnum(r, "div.scalar", c.piso.divScalar, divSchemeFromString);
        } else if (b.name == "solvers") {
            readSolver(r, "p", c.piso.pressure);
            readSolver(r, "U", c.piso.momentum);
            readSolver(r, "scalar", c.piso.scalar);
        } else if (b.name == "piso") {
            const long nc = r.integer("nCorrectors", c.piso.nCorrectors);
            if (nc < 1) r.failAt(r.entry("nCorrectors"), "nCorrectors must be at least 1");
            c.piso.nCorrectors = static_cast<int>(nc);
            c.piso.momentumPredictor = r.flag("momentumPredictor", c.piso.momentumPredictor);
            c.piso.dpdt = r.flag("dpdt", c.piso.dpdt);
        } else if (b.name == "chemistry") {
            haveChem = true;
            c.piso.chemistryMode = readEnum(r, "mode", c.piso.chemistryMode, chemistryModeFromString);
            c.mechanismPath = r.text("mechanism");
            c.weightsPath = r.text("weights", "");
            c.trainingDt = r.number("trainingDt", 0.0);
            c.piso.chemistry.absTol = r.number("absTol", c.piso.chemistry.absTol);
            c.piso.chemistry.relTol = r.number("relTol", c.piso.chemistry.relTol);
            const long ms = r.integer("maxSubsteps", static_cast<long>(c.piso.chemistry.maxSubsteps));
            if (ms < 1) r.failAt(r.entry("maxSubsteps"), "maxSubsteps must be positive");
            c.piso.chemistry.maxSubsteps = static_cast<std::size_t>(ms);
            const long w = r.integer("workers", 1);
            if (w < 1) r.failAt(r.entry("workers"), "workers must be at least 1");
            c.piso.chemistryWorkers = static_cast<unsigned>(w);
        } else if (b.name == "init") {
            haveInit = true;
            const ini::Entry& kind = r.entry("kind");
            if (kind.value != "tgv" && kind.value != "tgv2d")
                r.failAt(kind, "unknown init kind '" + kind.value + "' (expected tgv or tgv2d)");
            TgvInit& in = c.init;
            in.twoD = kind.value == "tgv2d";
            in.u0 = r.number("u0", in.u0);
            in.L = r.number("L", in.L);
            in.T = r.number("T", in.T);
            in.p = r.number("p", in.p);
            if (r.has("composition")) in.composition = toMap(r.pairs("composition"));
            in.reactive = r.flag("reactive", false);
            if (r.has("fuel")) in.fuel = toMap(r.pairs("fuel"));
            if (r.has("oxidizer")) in.oxidizer = toMap(r.pairs("oxidizer"));
            in.Tfuel = r.number("Tfuel", in.T);
            in.Toxidizer = r.number("Toxidizer", in.T);
            in.width = r.number("width", in.width);
            in.thickness = r.number("thickness", in.thickness);
        } else {
            ini::fail(source, b.line, 2, "unknown block [" + b.name + "]");
        }
        r.finish();
    }
    if (!haveTime) ini::fail(source, 1, 1, "missing [time] block");
    if (!haveChem) ini::fail(source, 1, 1, "missing [chemistry] block");
    if (!haveInit) ini::fail(source, 1, 1, "missing [init] block");
    if (c.init.Tfuel == 0.0) c.init.Tfuel = c.init.T;
    if (c.init.Toxidizer == 0.0) c.init.Toxidizer = c.init.T;
    try {
        c.validate(false);
    } catch (const InvalidArgument& e) {
        throw ParseError(e.what());
    }
    return c;
}

CaseConfig parseCase(const std::string& path) {
    const std::string text = ini::readFile(path);
    std::string dir = std::filesystem::path(path).parent_path().string();
    CaseConfig c = parseCaseText(text, path, dir.empty() ? "." : dir);
    c.validate(true);
    return c;
}

std::string emitCase(const CaseConfig& c) {
    std::ostringstream os;
    auto solver = [&](const char* p, const SolverControls& s) {
        os << p << ".solver = " << toString(s.kind) << "\n"
           << p << ".absTol = " << ini::format(s.absTol) << "\n"
           << p << ".relTol = " << ini::format(s.relTol) << "\n"
           << p << ".maxIter = " << s.maxIter << "\n";
    };
    os << "[mesh]\ndims = " << c.dims[0] << " " << c.dims[1] << " " << c.dims[2] << "\n";
    if (c.lengths[0] > 0.0)
        os << "lengths = " << ini::format(c.lengths[0]) << " " << ini::format(c.lengths[1]) << " "
           << ini::format(c.lengths[2]) << "\n";
    os << "patches =";
    for (PatchKind k : c.patches.kinds) os << " " << toString(k);
    os << "\n\n[time]\ndt = " << ini::format(c.dt) << "\nendTime = " << ini::format(c.endTime)
       << "\nmaxCo = " << ini::format(c.maxCo) << "\nwriteInterval = " << c.writeInterval << "\n";
    os << "\n[schemes]\nddt = " << toString(c.piso.ddt) << "\ndiv.U = " << toString(c.piso.divMomentum)
       << "\ndiv.scalar = " << toString(c.piso.divScalar) << "\n";
    os << "\n[solvers]\n";
    solver("p", c.piso.pressure);
    solver("U", c.piso.momentum);
    solver("scalar", c.piso.scalar);
    os << "\n[piso]\nnCorrectors = " << c.piso.nCorrectors
       << "\nmomentumPredictor = " << (c.piso.momentumPredictor ? "true" : "false")
       << "\ndpdt = " << (c.piso.dpdt ? "true" : "false") << "\n";
    os << "\n[chemistry]\nmode = " << toString(c.piso.chemistryMode) << "\nmechanism = " << c.mechanismPath << "\n";
    if (!c.weightsPath.empty()) os << "weights = " << c.weightsPath << "\n";
    if (c.trainingDt > 0.0) os << "trainingDt = " << ini::format(c.trainingDt) << "\n";
    os << "absTol = " << ini::format(c.piso.chemistry.absTol) << "\nrelTol = " << ini::format(c.piso.chemistry.relTol)
       << "\nmaxSubsteps = " << c.piso.chemistry.maxSubsteps << "\nworkers = " << c.piso.chemistryWorkers << "\n";
    const TgvInit& in = c.init;
    os << "\n[init]\nkind = " << (in.twoD ? "tgv2d" : "tgv") << "\nu0 = " << ini::format(in.u0) << "\nL = " << ini::format(in.L)
       << "\nT = " << ini::format(in.T) << "\np = " << ini::format(in.p) << "\n";
    if (!in.composition.empty()) os << "composition = " << composition(in.composition) << "\n";
    os << "reactive = " << (in.reactive ? "true" : "false") << "\n";
    if (!in.fuel.empty()) os << "fuel = " << composition(in.fuel) << "\n";
    if (!in.oxidizer.empty()) os << "oxidizer = " << composition(in.oxidizer) << "\n";
    os << "Tfuel = " << ini::format(in.Tfuel) << "\nToxidizer = " << ini::format(in.Toxidizer)
       << "\nwidth = " << ini::format(in.width) << "\nthickness = " << ini::format(in.thickness) << "\n";
    return os.str();
}

} // namespace rflow
