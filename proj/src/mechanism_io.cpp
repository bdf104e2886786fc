#include "ini.hpp"
#include "rflow/driver.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

namespace rflow {

namespace {

struct Units {
    double eaToJPerKmol = 1.0;
    bool cgs = false; ///< A in mol, cm^3, s
};

Units readUnits(const ini::Document& doc) {
    Units u;
    const ini::Block* block = nullptr;
    for (const auto& b : doc.blocks)
        if (b.name == "units") {
            if (block) ini::fail(doc.source, b.line, 1, "duplicate [units] block");
            block = &b;
        }
    if (!block) ini::fail(doc.source, 1, 1, "missing [units] block");
    ini::Reader r(doc, *block);
    const ini::Entry& ea = r.entry("Ea");
    if (ea.value == "J/kmol") u.eaToJPerKmol = 1.0;
    else if (ea.value == "J/mol") u.eaToJPerKmol = 1e3;
    else if (ea.value == "cal/mol") u.eaToJPerKmol = 4184.0;
    else if (ea.value == "kcal/mol") u.eaToJPerKmol = 4184e3;
    else if (ea.value == "K") u.eaToJPerKmol = kRu;
    else r.failAt(ea, "unknown activation-energy unit '" + ea.value + "' (J/kmol, J/mol, cal/mol, kcal/mol or K)");
    const ini::Entry& a = r.entry("A");
    if (a.value == "kmol-m3-s") u.cgs = false;
    else if (a.value == "mol-cm3-s") u.cgs = true;
    else r.failAt(a, "unknown pre-exponential unit system '" + a.value + "' (kmol-m3-s or mol-cm3-s)");
    r.finish();
    return u;
}

SpeciesDef readSpecies(const ini::Document& doc, const ini::Block& b) {
    ini::Reader r(doc, b);
    if (b.arg.empty() || b.arg.find_first_of(" \t") != std::string::npos)
        r.failBlock("species block needs exactly one name");
    SpeciesDef s;
    s.name = b.arg;
    s.W = r.number("W");
    if (r.has("elements"))
        for (const auto& [e, n] : r.pairs("elements")) s.elements[e] = n;
    const auto tr = r.numbers("nasa7.T", 3);
    s.thermo.Tlow = tr[0];
    s.thermo.Tcommon = tr[1];
    s.thermo.Thigh = tr[2];
    const auto lo = r.numbers("nasa7.low", 7), hi = r.numbers("nasa7.high", 7);
    std::copy(lo.begin(), lo.end(), s.thermo.low.begin());
    std::copy(hi.begin(), hi.end(), s.thermo.high.begin());
    const ini::Entry& v = r.entry("viscosity");
    std::istringstream vs(v.value);
    std::string model;
    vs >> model;
    std::vector<double> args;
    for (std::string w; vs >> w;) {
        double x = 0.0;
        auto [p, ec] = std::from_chars(w.data(), w.data() + w.size(), x);
        if (ec != std::errc() || p != w.data() + w.size()) r.failAt(v, "expected a number, got '" + w + "'");
        args.push_back(x);
    }
    if (model == "sutherland" && args.size() == 2) {
        s.transport.kind = TransportDef::Kind::Sutherland;
        s.transport.As = args[0];
        s.transport.Ts = args[1];
    } else if (model == "constant" && args.size() == 1) {
        s.transport.kind = TransportDef::Kind::Constant;
        s.transport.mu = args[0];
    } else {
        r.failAt(v, "expected 'sutherland As Ts' or 'constant mu'");
    }
    s.lewis = r.number("lewis", 1.0);
    r.finish();
    try {
        s.validate();
    } catch (const InvalidArgument& e) {
        r.failBlock(e.what());
    }
    return s;
}

bool isNumberPrefix(char c) { return std::isdigit(static_cast<unsigned char>(c)) || c == '.'; }

// One side of an equation: "2 H + O2 + M".
std::vector<StoichTerm> readSide(const std::string& text, const Mixture& mix, bool& thirdBody,
                                 const std::function<void(const std::string&)>& bad) {
    std::vector<StoichTerm> out;
    thirdBody = false;
    std::istringstream in(text);
    std::vector<std::string> tokens;
    for (std::string w; in >> w;) tokens.push_back(w);
    // Tokens are "+", coefficients or names; "2H" is accepted as "2 H".
    double coeff = 0.0;
    bool expectTerm = true;
    for (const std::string& t : tokens) {
        if (t == "+") {
            if (expectTerm) bad("unexpected '+'");
            expectTerm = true;
            continue;
        }
        if (!expectTerm) bad("expected '+' before '" + t + "'");
        std::string name = t;
        double nu = coeff > 0.0 ? coeff : 1.0;
        if (isNumberPrefix(t[0])) {
            std::size_t i = 0;
            while (i < t.size() && isNumberPrefix(t[i])) ++i;
            double c = 0.0;
            auto [p, ec] = std::from_chars(t.data(), t.data() + i, c);
            if (ec != std::errc() || p != t.data() + i || !(c > 0.0)) bad("bad coefficient in '" + t + "'");
            if (i == t.size()) {
                if (coeff > 0.0) bad("two coefficients in a row");
                coeff = c;
                continue;
            }
            if (coeff > 0.0) bad("two coefficients in a row");
            nu = c;
            name = t.substr(i);
        }
        coeff = 0.0;
        expectTerm = false;
        if (name == "M") {
            if (nu != 1.0) bad("third body M takes no coefficient");
            if (thirdBody) bad("M appears twice on one side");
            thirdBody = true;
            continue;
        }
        std::size_t k = 0;
        try {
            k = mix.index(name);
        } catch (const InvalidArgument&) {
            bad("unknown species '" + name + "'");
        }
        bool merged = false;
        for (auto& st : out)
            if (st.species == k) {
                st.nu += nu;
                merged = true;
            }
        if (!merged) out.push_back({k, nu});
    }
    if (expectTerm) bad("incomplete side '" + text + "'");
    return out;
}

Reaction readReaction(const ini::Document& doc, const ini::Block& b, const Mixture& mix, const Units& u) {
    ini::Reader r(doc, b);
    if (!b.arg.empty()) r.failBlock("reaction blocks take no name; use the equation key");
    const ini::Entry& eq = r.entry("equation");
    auto bad = [&](const std::string& msg) -> void { r.failAt(eq, msg); };
    Reaction rx;
    std::string lhs, rhs;
    std::size_t pos = eq.value.find("<=>");
    if (pos != std::string::npos) {
        rx.reversible = true;
        lhs = eq.value.substr(0, pos);
        rhs = eq.value.substr(pos + 3);
    } else if ((pos = eq.value.find("=>")) != std::string::npos) {
        lhs = eq.value.substr(0, pos);
        rhs = eq.value.substr(pos + 2);
    } else {
        bad("equation needs '=>' or '<=>'");
    }
    if (rhs.find('=') != std::string::npos || lhs.find('=') != std::string::npos) bad("more than one arrow");
    bool tbL = false, tbR = false;
    rx.reactants = readSide(lhs, mix, tbL, bad);
    rx.products = readSide(rhs, mix, tbR, bad);
    if (tbL != tbR) bad("third body M must appear on both sides");
    rx.thirdBody = tbL;
    if (rx.reactants.empty() || rx.products.empty()) bad("needs species on both sides");
    rx.label = reactionEquation(rx, mix);

    double order = 0.0;
    for (const auto& t : rx.reactants) order += t.nu;
    if (rx.thirdBody) order += 1.0;
    rx.A = r.number("A");
    if (u.cgs) rx.A *= std::pow(1e-3, order - 1.0);
    rx.beta = r.number("beta", 0.0);
    rx.Ea = r.number("Ea", 0.0) * u.eaToJPerKmol;
    if (rx.thirdBody) {
        rx.efficiencies.assign(mix.nSpecies(), 1.0);
        if (r.has("efficiencies")) {
            const ini::Entry& ef = r.entry("efficiencies");
            for (const auto& [name, v] : r.pairs("efficiencies")) {
                std::size_t k = 0;
                try {
                    k = mix.index(name);
                } catch (const InvalidArgument&) {
                    r.failAt(ef, "unknown species '" + name + "' in efficiencies");
                }
                if (!(v >= 0.0)) r.failAt(ef, "efficiencies must be non-negative");
                rx.efficiencies[k] = v;
            }
        }
    } else if (r.has("efficiencies")) {
        r.failAt(r.entry("efficiencies"), "efficiencies given for a reaction without M");
    }
    r.finish();

    // Atom audit with the species named, before the mechanism's own checks.
    std::set<std::string> elements;
    for (const auto* side : {&rx.reactants, &rx.products})
        for (const auto& t : *side)
            for (const auto& [e, n] : mix.species(t.species).elements) elements.insert(e);
    for (const std::string& e : elements) {
        double in = 0.0, out = 0.0;
        std::ostringstream who;
        for (const auto* side : {&rx.reactants, &rx.products}) {
            who << (side == &rx.reactants ? "reactants" : "; products");
            for (const auto& t : *side) {
                const auto& el = mix.species(t.species).elements;
                const auto it = el.find(e);
                const double n = it == el.end() ? 0.0 : t.nu * it->second;
                (side == &rx.reactants ? in : out) += n;
                who << " " << mix.species(t.species).name << ":" << n;
            }
        }
        if (std::abs(in - out) > 1e-12 * std::max(1.0, in + out))
            r.failAt(eq, "element " + e + " is unbalanced (" + ini::format(in) + " in, " + ini::format(out) +
                             " out; " + who.str() + ")");
    }
    return rx;
}

void appendTerms(std::ostringstream& os, const std::vector<StoichTerm>& side, bool thirdBody, const Mixture& mix) {
    bool first = true;
    for (const auto& t : side) {
        if (!first) os << " + ";
        first = false;
        if (t.nu != 1.0) os << ini::format(t.nu) << " ";
        os << mix.species(t.species).name;
    }
    if (thirdBody) os << " + M";
}

} // namespace

std::string reactionEquation(const Reaction& r, const Mixture& mix) {
    std::ostringstream os;
    appendTerms(os, r.reactants, r.thirdBody, mix);
    os << (r.reversible ? " <=> " : " => ");
    appendTerms(os, r.products, r.thirdBody, mix);
    return os.str();
}

Mechanism parseMechanismText(const std::string& text, const std::string& source) {
    const ini::Document doc = ini::parse(text, source);
    const Units units = readUnits(doc);
    std::vector<SpeciesDef> species;
    double prandtl = 0.71;
    const ini::Block* mixtureBlock = nullptr;
    for (const auto& b : doc.blocks) {
        if (b.name == "species") {
            species.push_back(readSpecies(doc, b));
            for (std::size_t j = 0; j + 1 < species.size(); ++j)
                if (species[j].name == species.back().name)
                    ini::fail(source, b.line, 1, "duplicate species '" + species.back().name + "'");
        } else if (b.name == "mixture") {
            if (mixtureBlock) ini::fail(source, b.line, 1, "duplicate [mixture] block");
            mixtureBlock = &b;
        } else if (b.name != "units" && b.name != "reaction") {
            ini::fail(source, b.line, 2, "unknown block [" + b.name + "]");
        }
    }
    if (species.empty()) ini::fail(source, 1, 1, "no [species] blocks");
    std::vector<std::string> inertNames;
    const ini::Entry* inertEntry = nullptr;
    if (mixtureBlock) {
        ini::Reader r(doc, *mixtureBlock);
        prandtl = r.number("prandtl", prandtl);
        if ((inertEntry = r.find("inert"))) {
            std::istringstream in(inertEntry->value);
            for (std::string w; in >> w;) inertNames.push_back(w);
        }
        r.finish();
    }
    Mixture mix;
    try {
        mix = Mixture(species, prandtl);
    } catch (const InvalidArgument& e) {
        ini::fail(source, mixtureBlock ? mixtureBlock->line : 1, 1, e.what());
    }
    std::vector<std::size_t> inert;
    for (const std::string& name : inertNames) {
        try {
            inert.push_back(mix.index(name));
        } catch (const InvalidArgument&) {
            ini::fail(source, inertEntry->line, inertEntry->valueCol, "unknown inert species '" + name + "'");
        }
    }
    std::vector<Reaction> reactions;
    std::vector<int> lines;
    for (const auto& b : doc.blocks)
        if (b.name == "reaction") {
            reactions.push_back(readReaction(doc, b, mix, units));
            lines.push_back(b.line);
        }
    try {
        return Mechanism(mix, reactions, inert);
    } catch (const InvalidArgument& e) {
        // Name the offending block when the message identifies a reaction.
        const std::string msg = e.what();
        for (std::size_t i = 0; i < reactions.size(); ++i)
            if (msg.find("'" + reactions[i].label + "'") != std::string::npos) ini::fail(source, lines[i], 1, msg);
        ini::fail(source, 1, 1, msg);
    }
}

Mechanism parseMechanism(const std::string& path) { return parseMechanismText(ini::readFile(path), path); }

std::string emitMechanism(const Mechanism& mech) {
    const Mixture& mix = mech.mixture();
    std::ostringstream os;
    auto list = [&](const auto& arr) {
        std::string s;
        for (double v : arr) s += (s.empty() ? "" : " ") + ini::format(v);
        return s;
    };
    os << "[units]\nA = kmol-m3-s\nEa = J/kmol\n\n[mixture]\nprandtl = " << ini::format(mix.prandtl()) << "\n";
    if (!mech.inert().empty()) {
        os << "inert =";
        for (std::size_t k : mech.inert()) os << " " << mix.species(k).name;
        os << "\n";
    }
    for (const SpeciesDef& s : mix.allSpecies()) {
        os << "\n[species " << s.name << "]\nW = " << ini::format(s.W) << "\n";
        if (!s.elements.empty()) {
            os << "elements =";
            for (const auto& [e, n] : s.elements) os << " " << e << ":" << ini::format(n);
            os << "\n";
        }
        os << "nasa7.T = " << ini::format(s.thermo.Tlow) << " " << ini::format(s.thermo.Tcommon) << " "
           << ini::format(s.thermo.Thigh) << "\n";
        os << "nasa7.low = " << list(s.thermo.low) << "\n";
        os << "nasa7.high = " << list(s.thermo.high) << "\n";
        if (s.transport.kind == TransportDef::Kind::Constant)
            os << "viscosity = constant " << ini::format(s.transport.mu) << "\n";
        else
            os << "viscosity = sutherland " << ini::format(s.transport.As) << " " << ini::format(s.transport.Ts) << "\n";
        os << "lewis = " << ini::format(s.lewis) << "\n";
    }
    for (const Reaction& r : mech.reactions()) {
        os << "\n[reaction]\nequation = " << reactionEquation(r, mix) << "\nA = " << ini::format(r.A)
           << "\nbeta = " << ini::format(r.beta) << "\nEa = " << ini::format(r.Ea) << "\n";
        if (r.thirdBody) {
            std::string eff;
            for (std::size_t k = 0; k < r.efficiencies.size(); ++k)
                if (r.efficiencies[k] != 1.0) eff += " " + mix.species(k).name + ":" + ini::format(r.efficiencies[k]);
            if (!eff.empty()) os << "efficiencies =" << eff << "\n";
        }
    }
    return os.str();
}

} // namespace rflow
