#pragma once

// Line-oriented "[block arg]" / "key = value" reader shared by the case and
// mechanism parsers. '#' starts a comment. Every lookup marks its entry as
// used so that finish() can reject unknown keys.

#include "rflow/error.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace rflow::ini {

struct Entry {
    std::string key;
    std::string value;
    int line = 0;
    int keyCol = 0;
    int valueCol = 0;
    mutable bool used = false;
};

struct Block {
    std::string name;
    std::string arg; ///< text after the name inside the brackets, trimmed
    int line = 0;
    std::vector<Entry> entries;
};

struct Document {
    std::string source;
    std::vector<Block> blocks;
};

Document parse(const std::string& text, const std::string& source);
std::string readFile(const std::string& path);

[[noreturn]] void fail(const std::string& source, int line, int col, const std::string& msg);

/// Typed access to one block.
class Reader {
public:
    Reader(const Document& doc, const Block& block) : doc_(doc), block_(block) {}

    bool has(const std::string& key) const;
    const Entry& entry(const std::string& key) const;
    const Entry* find(const std::string& key) const;

    std::string text(const std::string& key) const;
    std::string text(const std::string& key, const std::string& fallback) const;
    double number(const std::string& key) const;
    double number(const std::string& key, double fallback) const;
    long integer(const std::string& key) const;
    long integer(const std::string& key, long fallback) const;
    bool flag(const std::string& key, bool fallback) const;
    std::vector<double> numbers(const std::string& key, std::size_t count) const;
    /// "name:value name:value ..." with unique names.
    std::vector<std::pair<std::string, double>> pairs(const std::string& key) const;

    [[noreturn]] void failAt(const Entry& e, const std::string& msg) const;
    [[noreturn]] void failBlock(const std::string& msg) const;
    /// Throws on the first entry no lookup touched.
    void finish() const;

    const Block& block() const { return block_; }

private:
    const Document& doc_;
    const Block& block_;
};

/// Shortest decimal text that reads back to the same double.
std::string format(double v);

} // namespace rflow::ini
