#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "ssmi/parser.hpp"
#include "ssmi/validator.hpp"
#include "ssmi/workbook.hpp"

namespace support {

inline std::string source_path(const std::string& rel) { return std::string(SSMI_SOURCE_DIR) + "/" + rel; }

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string fixture_text() { return read_text(source_path("models/marcos_widgets.ssm")); }

inline ssmi::Model parse_or_throw(const std::string& text) {
    auto m = ssmi::parse_model(text);
    if (!m) throw std::runtime_error("parse failed: " + ssmi::render(m.error().front()));
    return std::move(*m);
}

inline ssmi::ValidatedModel validated(const std::string& text) {
    auto vm = ssmi::validate(parse_or_throw(text));
    if (!vm) throw std::runtime_error("validation failed: " + ssmi::render(vm.error().front()));
    return std::move(*vm);
}

inline ssmi::ValidatedModel fixture() { return validated(fixture_text()); }

// Fixture text with the Region entity resized to `n` synthesized instances.
inline std::string fixture_with_regions(int n) {
    std::ostringstream ent, dist, deliv;
    ent << "entity Region = [";
    dist << "param Distribution : percent over Region = [";
    deliv << "param Delivery Cost : currency over Region = [";
    for (int i = 0; i < n; ++i) {
        const char* sep = i ? ", " : "";
        ent << sep << "Region " << ssmi::column_letters(i + 1);
        dist << sep << 1.0 / n;
        deliv << sep << 50 + (i * 7) % 40;
    }
    ent << "]";
    dist << "]";
    deliv << "]";
    std::istringstream in(fixture_text());
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.starts_with("entity Region"))
            out << ent.str() << "\n";
        else if (line.starts_with("param Distribution"))
            out << dist.str() << "\n";
        else if (line.starts_with("param Delivery Cost"))
            out << deliv.str() << "\n";
        else
            out << line << "\n";
    }
    return out.str();
}

struct CommandResult {
    int exit_code;
    std::string output;
};

// Runs a shell command, capturing stdout.
inline CommandResult run(const std::string& command) {
    FILE* pipe = popen(command.c_str(), "r");
    if (!pipe) throw std::runtime_error("popen failed");
    std::string out;
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
    int status = pclose(pipe);
    int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return {code, out};
}

inline std::string cli() { return SSMI_CLI_PATH; }

inline std::string quote(const std::string& s) { return "'" + s + "'"; }

// Random valid models: scalar inputs and parameters, up to two entities,
// calculations drawn over earlier variables with consistent scopes.
class ModelGenerator {
public:
    explicit ModelGenerator(std::uint32_t seed) : rng_(seed) {}

    std::string next() {
        vars_.clear();
        entities_.clear();
        std::ostringstream out;
        out << "model \"Random " << counter_++ << "\"\n";
        int n_entities = pick(0, 2);
        const char* entity_names[] = {"Region", "Product"};
        for (int e = 0; e < n_entities; ++e) {
            int n = pick(1, 6);
            entities_.push_back({entity_names[e], n});
            out << "entity " << entity_names[e] << " = [";
            for (int i = 0; i < n; ++i) out << (i ? ", " : "") << entity_names[e][0] << "x" << i + 1;
            out << "]\n";
        }
        int total = pick(3, 12);
        int leaves = pick(2, std::min(5, total - 1));
        for (int i = 0; i < total; ++i) {
            Var v;
            v.name = std::string("Item ") + static_cast<char>('A' + i);
            v.entity = -1;
            if (i < leaves) {
                bool input = i == 0 || chance(0.3);
                if (!input && !entities_.empty() && chance(0.5)) v.entity = pick(0, static_cast<int>(entities_.size()) - 1);
                out << (input ? "input " : "param ") << v.name << format();
                if (v.entity >= 0) {
                    out << " over " << entities_[v.entity].name << " = [";
                    for (int k = 0; k < entities_[v.entity].count; ++k) out << (k ? ", " : "") << value();
                    out << "]\n";
                } else {
                    out << " = " << value() << "\n";
                }
            } else {
                if (!entities_.empty() && chance(0.5)) v.entity = pick(0, static_cast<int>(entities_.size()) - 1);
                bool output = i == total - 1 || chance(0.25);
                out << (output ? "output " : "calc ") << v.name << format();
                if (v.entity >= 0) out << " over " << entities_[v.entity].name;
                out << " = " << expression(v.entity, 2) << "\n";
            }
            vars_.push_back(v);
        }
        return out.str();
    }

private:
    struct Var {
        std::string name;
        int entity;
    };
    struct Entity {
        std::string name;
        int count;
    };

    int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }

    std::string format() {
        switch (pick(0, 5)) {
            case 0: return " : currency";
            case 1: return " : count";
            default: return "";
        }
    }

    std::string value() {
        std::ostringstream s;
        s << pick(1, 400) / 4.0;
        return s.str();
    }

    std::vector<int> usable(int entity) const {
        std::vector<int> out;
        for (int i = 0; i < static_cast<int>(vars_.size()); ++i)
            if (vars_[i].entity == -1 || vars_[i].entity == entity) out.push_back(i);
        return out;
    }

    std::vector<int> repeating() const {
        std::vector<int> out;
        for (int i = 0; i < static_cast<int>(vars_.size()); ++i)
            if (vars_[i].entity >= 0) out.push_back(i);
        return out;
    }

    std::string aggregate() {
        auto reps = repeating();
        int v = reps[pick(0, static_cast<int>(reps.size()) - 1)];
        const std::string& arg = vars_[v].name;
        bool many = entities_[vars_[v].entity].count > 1;
        switch (pick(0, many ? 6 : 4)) {
            case 0: return "SUM(" + arg + ")";
            case 1: return "AVERAGE(" + arg + ")";
            case 2: return "MIN(" + arg + ")";
            case 3: return "MAX(" + arg + ")";
            case 4: return "NPV(" + std::to_string(pick(1, 9)) + "%, " + arg + ")";
            case 5: return "VARIANCE(" + arg + ")";
            default: return "STDEV(" + arg + ")";
        }
    }

    std::string atom(int entity) {
        auto refs = usable(entity);
        bool can_agg = !repeating().empty();
        int r = pick(0, 9);
        if (r == 0) return value();
        if (r <= 2 && can_agg) return aggregate();
        if (refs.empty()) return value();
        return vars_[refs[pick(0, static_cast<int>(refs.size()) - 1)]].name;
    }

    std::string expression(int entity, int depth) {
        if (depth == 0 || chance(0.25)) return atom(entity);
        int kind = pick(0, 9);
        std::string l = expression(entity, depth - 1);
        if (kind == 9) return "(" + l + ") ^ " + std::to_string(pick(1, 2));
        if (kind == 8) return "-(" + l + ")";
        std::string r = expression(entity, depth - 1);
        const char* ops[] = {" + ", " + ", " + ", " - ", " * ", " * ", " / ", " + "};
        return "(" + l + ")" + ops[kind] + "(" + r + ")";
    }

    std::mt19937 rng_;
    std::vector<Var> vars_;
    std::vector<Entity> entities_;
    int counter_ = 0;
};

// Reads the entries of a zip archive written with the stored method and
// checks each CRC-32.
class StoredZip {
public:
    explicit StoredZip(const std::string& bytes) {
        std::size_t pos = 0;
        while (pos + 30 <= bytes.size() && u32(bytes, pos) == 0x04034b50) {
            if (u16(bytes, pos + 8) != 0) throw std::runtime_error("entry is not stored");
            std::uint32_t crc = u32(bytes, pos + 14);
            std::uint32_t size = u32(bytes, pos + 18);
            std::uint16_t name_len = u16(bytes, pos + 26);
            std::uint16_t extra = u16(bytes, pos + 28);
            std::string name = bytes.substr(pos + 30, name_len);
            std::string data = bytes.substr(pos + 30 + name_len + extra, size);
            if (crc32(data) != crc) throw std::runtime_error("crc mismatch in " + name);
            order_.push_back(name);
            entries_[name] = std::move(data);
            pos += 30 + name_len + extra + size;
        }
        if (entries_.empty()) throw std::runtime_error("no zip entries");
        if (bytes.find(std::string("PK\x05\x06", 4)) == std::string::npos)
            throw std::runtime_error("no end of central directory");
    }

    bool has(const std::string& name) const { return entries_.count(name) != 0; }
    const std::string& at(const std::string& name) const { return entries_.at(name); }
    const std::vector<std::string>& names() const { return order_; }

    static std::uint32_t crc32(const std::string& data) {
        std::uint32_t c = 0xffffffffu;
        for (unsigned char b : data) {
            c ^= b;
            for (int k = 0; k < 8; ++k) c = (c >> 1) ^ (0xedb88320u & (0u - (c & 1u)));
        }
        return ~c;
    }

private:
    static std::uint16_t u16(const std::string& b, std::size_t p) {
        return static_cast<std::uint16_t>(static_cast<unsigned char>(b[p]) |
                                          (static_cast<unsigned char>(b[p + 1]) << 8));
    }
    static std::uint32_t u32(const std::string& b, std::size_t p) {
        return u16(b, p) | (static_cast<std::uint32_t>(u16(b, p + 2)) << 16);
    }

    std::map<std::string, std::string> entries_;
    std::vector<std::string> order_;
};

}  // namespace support
