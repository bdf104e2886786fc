#include "ini.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace rflow::ini {

namespace {

std::string trim(const std::string& s, std::size_t& lead) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    lead = b;
    return s.substr(b, e - b);
}

bool validKey(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-')) return false;
    return true;
}

std::vector<std::pair<std::string, int>> words(const std::string& s, int col0) {
    std::vector<std::pair<std::string, int>> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        if (i >= s.size()) break;
        std::size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
        out.emplace_back(s.substr(i, j - i), col0 + static_cast<int>(i));
        i = j;
    }
    return out;
}

bool toDouble(const std::string& s, double& v) {
    const char* b = s.data();
    const char* e = b + s.size();
    auto [p, ec] = std::from_chars(b, e, v);
    return ec == std::errc() && p == e && std::isfinite(v);
}

} // namespace

void fail(const std::string& source, int line, int col, const std::string& msg) {
    std::ostringstream os;
    os << source << ":" << line << ":" << col << ": " << msg;
    throw ParseError(os.str());
}

std::string readFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Document parse(const std::string& text, const std::string& source) {
    Document doc;
    doc.source = source;
    std::istringstream in(text);
    std::string raw;
    int lineNo = 0;
    std::set<std::string> seen;
    while (std::getline(in, raw)) {
        ++lineNo;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        const std::size_t hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        std::size_t lead = 0;
        const std::string line = trim(raw, lead);
        if (line.empty()) continue;
        const int col = static_cast<int>(lead) + 1;
        if (line.front() == '[') {
            if (line.back() != ']') fail(source, lineNo, col + static_cast<int>(line.size()) - 1, "expected ']'");
            std::size_t l2 = 0;
            const std::string inner = trim(line.substr(1, line.size() - 2), l2);
            if (inner.empty()) fail(source, lineNo, col + 1, "empty block name");
            Block b;
            b.line = lineNo;
            const std::size_t sp = inner.find_first_of(" \t");
            b.name = inner.substr(0, sp);
            if (sp != std::string::npos) {
                std::size_t l3 = 0;
                b.arg = trim(inner.substr(sp), l3);
            }
            if (!validKey(b.name)) fail(source, lineNo, col + 1 + static_cast<int>(l2), "invalid block name '" + b.name + "'");
            doc.blocks.push_back(std::move(b));
            seen.clear();
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) fail(source, lineNo, col, "expected 'key = value' or '[block]'");
        if (doc.blocks.empty()) fail(source, lineNo, col, "entry outside of any block");
        std::size_t kl = 0, vl = 0;
        Entry e;
        e.key = trim(line.substr(0, eq), kl);
        e.value = trim(line.substr(eq + 1), vl);
        e.line = lineNo;
        e.keyCol = col + static_cast<int>(kl);
        e.valueCol = col + static_cast<int>(eq + 1 + vl);
        if (!validKey(e.key)) fail(source, lineNo, e.keyCol, "invalid key '" + e.key + "'");
        if (e.value.empty()) fail(source, lineNo, e.valueCol, "missing value for '" + e.key + "'");
        if (!seen.insert(e.key).second) fail(source, lineNo, e.keyCol, "duplicate key '" + e.key + "'");
        doc.blocks.back().entries.push_back(std::move(e));
    }
    return doc;
}

const Entry* Reader::find(const std::string& key) const {
    for (const Entry& e : block_.entries)
        if (e.key == key) {
            e.used = true;
            return &e;
        }
    return nullptr;
}

bool Reader::has(const std::string& key) const {
    for (const Entry& e : block_.entries)
        if (e.key == key) return true;
    return false;
}

const Entry& Reader::entry(const std::string& key) const {
    if (const Entry* e = find(key)) return *e;
    failBlock("missing required key '" + key + "'");
}

void Reader::failAt(const Entry& e, const std::string& msg) const { fail(doc_.source, e.line, e.valueCol, msg); }

void Reader::failBlock(const std::string& msg) const {
    fail(doc_.source, block_.line, 1, "[" + block_.name + (block_.arg.empty() ? "" : " " + block_.arg) + "]: " + msg);
}

void Reader::finish() const {
    for (const Entry& e : block_.entries)
        if (!e.used) fail(doc_.source, e.line, e.keyCol, "unknown key '" + e.key + "' in [" + block_.name + "]");
}

std::string Reader::text(const std::string& key) const { return entry(key).value; }

std::string Reader::text(const std::string& key, const std::string& fallback) const {
    const Entry* e = find(key);
    return e ? e->value : fallback;
}

double Reader::number(const std::string& key) const {
    const Entry& e = entry(key);
    double v = 0.0;
    if (!toDouble(e.value, v)) failAt(e, "expected a number for '" + key + "', got '" + e.value + "'");
    return v;
}

double Reader::number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

long Reader::integer(const std::string& key) const {
    const Entry& e = entry(key);
    long v = 0;
    const char* b = e.value.data();
    auto [p, ec] = std::from_chars(b, b + e.value.size(), v);
    if (ec != std::errc() || p != b + e.value.size())
        failAt(e, "expected an integer for '" + key + "', got '" + e.value + "'");
    return v;
}

long Reader::integer(const std::string& key, long fallback) const { return has(key) ? integer(key) : fallback; }

bool Reader::flag(const std::string& key, bool fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    if (e->value == "true" || e->value == "yes" || e->value == "on") return true;
    if (e->value == "false" || e->value == "no" || e->value == "off") return false;
    failAt(*e, "expected true or false for '" + key + "', got '" + e->value + "'");
}

std::vector<double> Reader::numbers(const std::string& key, std::size_t count) const {
    const Entry& e = entry(key);
    auto w = words(e.value, e.valueCol);
    if (w.size() != count)
        failAt(e, "expected " + std::to_string(count) + " numbers for '" + key + "', got " + std::to_string(w.size()));
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i)
        if (!toDouble(w[i].first, out[i])) fail(doc_.source, e.line, w[i].second, "expected a number, got '" + w[i].first + "'");
    return out;
}

std::vector<std::pair<std::string, double>> Reader::pairs(const std::string& key) const {
    const Entry& e = entry(key);
    std::vector<std::pair<std::string, double>> out;
    std::set<std::string> names;
    for (const auto& [w, col] : words(e.value, e.valueCol)) {
        const std::size_t c = w.find(':');
        double v = 0.0;
        if (c == std::string::npos || c == 0 || !toDouble(w.substr(c + 1), v))
            fail(doc_.source, e.line, col, "expected 'name:value', got '" + w + "'");
        const std::string name = w.substr(0, c);
        if (!names.insert(name).second) fail(doc_.source, e.line, col, "duplicate name '" + name + "'");
        out.emplace_back(name, v);
    }
    return out;
}

std::string format(double v) {
    char buf[40];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

} // namespace rflow::ini
