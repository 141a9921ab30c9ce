#include "stabledom/config.hpp"

#include "stabledom/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace stabledom {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string strip_comment(const std::string& s) {
    for (std::size_t i = 0; i < s.size(); ++i) {
        if ((s[i] == '#' || s[i] == ';') && (i == 0 || std::isspace(static_cast<unsigned char>(s[i - 1]))))
            return s.substr(0, i);
    }
    return s;
}

std::string field_name(const std::string& section, const std::string& key) {
    return section.empty() ? key : section + "." + key;
}

[[noreturn]] void fail(const std::string& field, int line, const std::string& what) {
    std::ostringstream os;
    if (line > 0) os << "line " << line << ": ";
    os << field << ": " << what;
    throw ConfigError(os.str(), line);
}

double to_double(const std::string& field, const IniDocument::Entry& e) {
    const std::string& v = e.value;
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) fail(field, e.line, "expected a number, got '" + v + "'");
    return out;
}

long long to_integer(const std::string& field, const IniDocument::Entry& e) {
    const std::string& v = e.value;
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) fail(field, e.line, "expected an integer, got '" + v + "'");
    return out;
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> to_doubles(const std::string& field, const IniDocument::Entry& e) {
    std::vector<double> out;
    for (const auto& item : split_list(e.value)) out.push_back(to_double(field, {item, e.line}));
    if (out.empty()) fail(field, e.line, "empty list");
    return out;
}

class Reader {
public:
    Reader(const IniDocument& doc, std::string section) : doc_(doc), section_(std::move(section)) {}

    const IniDocument::Entry* entry(const std::string& key) const { return doc_.find(section_, key); }
    std::string field(const std::string& key) const { return field_name(section_, key); }

    void number(const std::string& key, double& target, double lo, double hi, bool open_lo = true) const {
        if (const auto* e = entry(key)) {
            const double v = to_double(field(key), *e);
            const bool ok = (open_lo ? v > lo : v >= lo) && v <= hi;
            if (!ok) {
                std::ostringstream os;
                os << "value " << e->value << " outside " << (open_lo ? "(" : "[") << lo << ", " << hi << "]";
                fail(field(key), e->line, os.str());
            }
            target = v;
        }
    }

    template <typename Int>
    void integer(const std::string& key, Int& target, long long lo, long long hi) const {
        if (const auto* e = entry(key)) {
            const long long v = to_integer(field(key), *e);
            if (v < lo || v > hi)
                fail(field(key), e->line,
                     "value " + e->value + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
            target = static_cast<Int>(v);
        }
    }

    int line(const std::string& key) const {
        const auto* e = entry(key);
        return e ? e->line : doc_.section_line(section_);
    }

private:
    const IniDocument& doc_;
    std::string section_;
};

const std::map<std::string, std::set<std::string>>& allowed_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"", {"command"}},
        {"kernel", {"profile", "m", "beta", "gamma", "knots", "alpha", "dim", "M", "eps0"}},
        {"grid", {"half_width", "cells_per_eps"}},
        {"run",
         {"t", "eps", "n_max", "n_paths", "seed", "tol", "cert_tol", "lag_max", "window", "cells_per_bin", "rel_tol",
          "abs_tol", "max_subdivisions"}},
        {"sweep", {"betas", "gammas", "alphas", "dims", "lags", "m"}},
        {"output", {"dir"}},
    };
    return keys;
}

PhiProfile read_profile(const Reader& r) {
    const auto* e = r.entry("profile");
    const std::string name = e ? e->value : "ConstantOne";
    PhiProfile phi;
    if (name == "ConstantOne") {
        phi = ConstantOne{};
    } else if (name == "ExpPower") {
        ExpPower p;
        r.number("m", p.m, 0.0, 1e6);
        r.number("beta", p.beta, 0.0, 100.0);
        r.number("gamma", p.gamma, -100.0, 100.0);
        phi = p;
    } else if (name == "PolyDecay") {
        PolyDecay p;
        r.number("gamma", p.gamma, 0.0, 100.0, false);
        phi = p;
    } else if (name == "LogDecay") {
        phi = LogDecay{};
    } else if (name == "LogLogDecay") {
        phi = LogLogDecay{};
    } else if (name == "Tabulated") {
        const auto* k = r.entry("knots");
        if (!k) fail(r.field("knots"), r.line("profile"), "a Tabulated profile needs knots = s:phi, ...");
        Tabulated t;
        for (const auto& item : split_list(k->value)) {
            const auto colon = item.find(':');
            if (colon == std::string::npos) fail(r.field("knots"), k->line, "knot '" + item + "' is not s:phi");
            const double s = to_double(r.field("knots"), {trim(item.substr(0, colon)), k->line});
            const double v = to_double(r.field("knots"), {trim(item.substr(colon + 1)), k->line});
            t.knots.emplace_back(s, v);
        }
        phi = t;
    } else {
        fail(r.field("profile"), r.line("profile"), "unknown profile '" + name + "'");
    }
    try {
        validate_profile(phi);
    } catch (const DomainError& err) {
        fail(r.field("profile"), r.line("profile"), err.what());
    } catch (const PreconditionError& err) {
        fail(r.field("profile"), r.line("profile"), err.what());
    }
    return phi;
}

} // namespace

IniDocument IniDocument::parse(std::istream& in) {
    IniDocument doc;
    doc.sections_[""];
    std::string current;
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": unterminated section header", line_no);
            current = trim(line.substr(1, line.size() - 2));
            if (current.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty section name", line_no);
            if (doc.sections_.count(current))
                throw ConfigError("line " + std::to_string(line_no) + ": duplicate section [" + current + "]", line_no);
            doc.sections_[current].line = line_no;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value', got '" + line + "'", line_no);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": missing key before '='", line_no);
        auto& entries = doc.sections_[current].entries;
        if (entries.count(key))
            throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + field_name(current, key) +
                                  "' (first set on line " + std::to_string(entries[key].line) + ")",
                              line_no);
        entries[key] = Entry{value, line_no};
    }
    return doc;
}

int IniDocument::section_line(const std::string& section) const {
    const auto it = sections_.find(section);
    return it == sections_.end() ? 0 : it->second.line;
}

const IniDocument::Entry* IniDocument::find(const std::string& section, const std::string& key) const {
    const auto it = sections_.find(section);
    if (it == sections_.end()) return nullptr;
    const auto jt = it->second.entries.find(key);
    return jt == it->second.entries.end() ? nullptr : &jt->second;
}

std::vector<std::string> IniDocument::keys(const std::string& section) const {
    std::vector<std::string> out;
    const auto it = sections_.find(section);
    if (it != sections_.end())
        for (const auto& [k, _] : it->second.entries) out.push_back(k);
    return out;
}

std::vector<std::string> IniDocument::sections() const {
    std::vector<std::string> out;
    for (const auto& [k, _] : sections_) out.push_back(k);
    return out;
}

std::string to_string(Command c) {
    switch (c) {
    case Command::CheckAssumptions: return "check-assumptions";
    case Command::Iterate: return "iterate";
    case Command::Density: return "density";
    case Command::Simulate: return "simulate";
    case Command::VerifyBounds: return "verify-bounds";
    case Command::SweepS3: return "sweep-s3";
    }
    return "?";
}

Command parse_command(const std::string& name, int line) {
    for (Command c : {Command::CheckAssumptions, Command::Iterate, Command::Density, Command::Simulate,
                      Command::VerifyBounds, Command::SweepS3})
        if (to_string(c) == name) return c;
    fail("command", line, "unknown command '" + name + "'");
}

ExperimentConfig parse_experiment(std::istream& in, std::optional<Command> command) {
    const IniDocument doc = IniDocument::parse(in);
    const auto& allowed = allowed_keys();
    for (const auto& section : doc.sections()) {
        const auto it = allowed.find(section);
        if (it == allowed.end()) fail("[" + section + "]", doc.section_line(section), "unknown section");
        for (const auto& key : doc.keys(section))
            if (!it->second.count(key)) fail(field_name(section, key), doc.find(section, key)->line, "unknown key");
    }

    ExperimentConfig cfg;
    const auto* cmd = doc.find("", "command");
    if (cmd) cfg.command = parse_command(cmd->value, cmd->line);
    if (command) {
        if (cmd && cfg.command != *command)
            fail("command", cmd->line, "config is for '" + cmd->value + "', not '" + to_string(*command) + "'");
        cfg.command = *command;
    } else if (!cmd) {
        fail("command", 0, "no command given");
    }

    std::vector<std::string> needed;
    switch (cfg.command) {
    case Command::CheckAssumptions: needed = {"kernel"}; break;
    case Command::Iterate:
    case Command::Density:
    case Command::Simulate:
    case Command::VerifyBounds: needed = {"kernel", "grid", "run"}; break;
    case Command::SweepS3: break;
    }
    for (const auto& s : needed)
        if (!doc.has_section(s)) fail("[" + s + "]", 0, "section required by " + to_string(cfg.command) + " is missing");

    const Reader k(doc, "kernel");
    cfg.kernel.phi = read_profile(k);
    auto& prm = cfg.kernel.params;
    k.number("alpha", prm.alpha, 0.0, 2.0);
    if (prm.alpha >= 2.0) fail(k.field("alpha"), k.line("alpha"), "alpha must be below 2");
    k.integer("dim", prm.dim, 1, 3);
    k.number("M", prm.M, 0.0, 1e12);
    k.number("eps0", prm.eps0, 0.0, 1e12);

    const Reader g(doc, "grid");
    g.number("half_width", cfg.grid.half_width, 0.0, 1e6);
    g.integer("cells_per_eps", cfg.grid.cells_per_eps, 1, 1000);

    const Reader r(doc, "run");
    auto& run = cfg.run;
    r.number("t", run.t, 0.0, 1e6);
    r.number("eps", run.eps, 0.0, 1.0);
    r.integer("n_max", run.n_max, 1, 100000);
    r.integer("n_paths", run.n_paths, 1, 1000000000000LL);
    if (const auto* e = r.entry("seed")) {
        std::uint64_t seed = 0;
        const auto [ptr, ec] = std::from_chars(e->value.data(), e->value.data() + e->value.size(), seed);
        if (ec != std::errc() || ptr != e->value.data() + e->value.size())
            fail(r.field("seed"), e->line, "expected an unsigned 64-bit integer, got '" + e->value + "'");
        run.seed = seed;
    }
    r.number("tol", run.tol, 0.0, 1.0);
    r.number("cert_tol", run.cert_tol, 0.0, 1.0);
    r.number("lag_max", run.lag_max, 4.0, 1e6, false);
    if (r.entry("window")) {
        double w = 0.0;
        r.number("window", w, 0.0, 1e6);
        run.window = w;
    }
    r.integer("cells_per_bin", run.cells_per_bin, 1, 1000);
    r.number("rel_tol", run.quad.rel_tol, 0.0, 1.0);
    r.number("abs_tol", run.quad.abs_tol, 0.0, 1.0);
    r.integer("max_subdivisions", run.quad.max_subdivisions, 1, 10000000);
    prm.eps = run.eps;
    if (prm.eps > prm.eps0) fail(r.field("eps"), r.line("eps"), "eps exceeds kernel.eps0");

    const Reader s(doc, "sweep");
    auto& sw = cfg.sweep;
    if (const auto* e = s.entry("betas")) {
        sw.betas = to_doubles(s.field("betas"), *e);
        for (double b : sw.betas)
            if (!(b > 0.0)) fail(s.field("betas"), e->line, "beta must be positive");
    }
    if (const auto* e = s.entry("gammas")) {
        sw.gammas.clear();
        sw.gamma_relative.clear();
        for (const auto& item : split_list(e->value)) {
            if (item.rfind("g*", 0) == 0) {
                const std::string rest = trim(item.substr(2));
                sw.gammas.push_back(rest.empty() ? 0.0
                                                 : to_double(s.field("gammas"),
                                                             {rest.front() == '+' ? rest.substr(1) : rest, e->line}));
                sw.gamma_relative.push_back(true);
            } else {
                sw.gammas.push_back(to_double(s.field("gammas"), {item, e->line}));
                sw.gamma_relative.push_back(false);
            }
        }
        if (sw.gammas.empty()) fail(s.field("gammas"), e->line, "empty list");
    }
    if (const auto* e = s.entry("alphas")) {
        sw.alphas = to_doubles(s.field("alphas"), *e);
        for (double a : sw.alphas)
            if (!(a > 0.0 && a < 2.0)) fail(s.field("alphas"), e->line, "alpha must lie in (0, 2)");
    }
    if (const auto* e = s.entry("dims")) {
        sw.dims.clear();
        for (double d : to_doubles(s.field("dims"), *e)) {
            if (d != 1.0 && d != 2.0 && d != 3.0) fail(s.field("dims"), e->line, "dimension must be 1, 2 or 3");
            sw.dims.push_back(static_cast<int>(d));
        }
    }
    if (const auto* e = s.entry("lags")) {
        sw.lags = to_doubles(s.field("lags"), *e);
        if (sw.lags.size() < 3) fail(s.field("lags"), e->line, "at least three lags are needed");
        for (std::size_t i = 0; i < sw.lags.size(); ++i)
            if (!(sw.lags[i] > 2.0) || (i > 0 && !(sw.lags[i] > sw.lags[i - 1])))
                fail(s.field("lags"), e->line, "lags must increase and exceed 2");
    }
    s.number("m", sw.m, 0.0, 1e6);

    if (const auto* e = doc.find("output", "dir")) {
        if (e->value.empty()) fail("output.dir", e->line, "empty path");
        cfg.out_dir = e->value;
    }
    return cfg;
}

ExperimentConfig load_experiment(const std::string& path, std::optional<Command> command) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'", 0);
    return parse_experiment(in, command);
}

} // namespace stabledom
