#include "fsidlm/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace fsidlm {

SimConfig annulus_preset() {
    SimConfig c;
    c.scenario = Scenario::Annulus;
    c.fluid_nx = c.fluid_ny = 64;
    c.fluid_box = {0.0, 1.0, 0.0, 1.0};
    c.solid_nx = 96;
    c.solid_ny = 48;
    c.rho = 1.0;
    c.nu = 0.1;
    c.law = MaterialLaw::linear(10.0);
    c.dt = 0.01;
    c.T = 2.0;
    return c;
}

SimConfig bar_preset() {
    SimConfig c;
    c.scenario = Scenario::Bar;
    c.fluid_nx = c.fluid_ny = 80;
    c.fluid_box = {0.0, 1.0, 0.0, 1.0};
    c.solid_nx = 120;
    c.solid_ny = 30;
    c.solid_rect = {0.0, 0.4, 0.45, 0.55};
    c.rho = 1.0;
    c.nu = 0.2;
    c.law = MaterialLaw::exponential(1.333, 9.242);
    c.dt = 0.01;
    c.T = 2.0;
    return c;
}

std::vector<std::string> validate_config(const SimConfig& c) {
    std::vector<std::string> errors;
    auto positive = [&](double v, const std::string& path) {
        if (!(v > 0.0)) errors.push_back(path + ": must be positive");
    };
    if (c.fluid_nx < 1) errors.push_back("fluid.nx: must be >= 1");
    if (c.fluid_ny < 1) errors.push_back("fluid.ny: must be >= 1");
    if (c.solid_nx < 1) errors.push_back("solid.nx: must be >= 1");
    if (c.solid_ny < 1) errors.push_back("solid.ny: must be >= 1");
    positive(c.fluid_box.width(), "fluid.box width");
    positive(c.fluid_box.height(), "fluid.box height");
    if (c.scenario != Scenario::Bar) {
        positive(c.annulus_r_in, "solid.r_in");
        if (!(c.annulus_r_out > c.annulus_r_in))
            errors.push_back("solid.r_out: must exceed solid.r_in");
    }
    positive(c.rho, "physics.rho");
    positive(c.nu, "physics.nu");
    if (c.law.kind == MaterialLaw::Kind::Linear)
        positive(c.law.kappa, "physics.kappa");
    else {
        positive(c.law.gamma, "physics.gamma");
        positive(c.law.eta, "physics.eta");
    }
    positive(c.dt, "time.dt");
    if (c.T < 0.0) errors.push_back("time.T: must be non-negative");
    if (c.T > 0.0 && c.dt > c.T) errors.push_back("time.dt: must not exceed time.T");
    positive(c.gmres_tol, "solver.gmres_tol");
    if (c.gmres_restart < 1) errors.push_back("solver.gmres_restart: must be >= 1");
    if (c.gmres_max_it < 1) errors.push_back("solver.gmres_max_it: must be >= 1");
    positive(c.newton_tol, "solver.newton_tol");
    if (c.newton_max_it < 1) errors.push_back("solver.newton_max_it: must be >= 1");
    if (c.threads < 0) errors.push_back("run.threads: must be >= 0");
    if (c.snapshot_stride < 1) errors.push_back("run.snapshot_stride: must be >= 1");
    return errors;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

/// Flat key-value view of a TOML subset: [section] headers, key = value
/// lines, # comments, bare strings with optional quotes.
std::map<std::string, std::string> parse_toml_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw IoError("line " + std::to_string(lineno) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw IoError("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        kv[section.empty() ? key : section + "." + key] = value;
    }
    return kv;
}

struct ConfigReader {
    std::map<std::string, std::string> kv;
    std::vector<std::string> errors;

    std::optional<std::string> take(const std::string& key) {
        const auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        std::string v = it->second;
        kv.erase(it);
        return v;
    }
    void get(const std::string& key, double& out) {
        if (auto v = take(key)) {
            try {
                out = std::stod(*v);
            } catch (...) {
                errors.push_back(key + ": not a number (\"" + *v + "\")");
            }
        }
    }
    void get(const std::string& key, int& out) {
        if (auto v = take(key)) {
            try {
                out = std::stoi(*v);
            } catch (...) {
                errors.push_back(key + ": not an integer (\"" + *v + "\")");
            }
        }
    }
    void get(const std::string& key, bool& out) {
        if (auto v = take(key)) {
            if (*v == "true")
                out = true;
            else if (*v == "false")
                out = false;
            else
                errors.push_back(key + ": not a boolean (\"" + *v + "\")");
        }
    }
};

SimConfig build_config(std::map<std::string, std::string> kv, std::vector<std::string>& errors) {
    std::string scenario = "annulus";
    if (const auto it = kv.find("scenario"); it != kv.end()) {
        scenario = it->second;
        kv.erase(it);
    }

    SimConfig c;
    if (scenario == "annulus")
        c = annulus_preset();
    else if (scenario == "bar")
        c = bar_preset();
    else if (scenario == "custom")
        c.scenario = Scenario::Custom;
    else
        errors.push_back("scenario: unknown scenario \"" + scenario + "\"");

    ConfigReader r{std::move(kv), {}};
    r.get("fluid.nx", c.fluid_nx);
    r.get("fluid.ny", c.fluid_ny);
    r.get("fluid.x0", c.fluid_box.x0);
    r.get("fluid.x1", c.fluid_box.x1);
    r.get("fluid.y0", c.fluid_box.y0);
    r.get("fluid.y1", c.fluid_box.y1);
    r.get("solid.nx", c.solid_nx);
    r.get("solid.ny", c.solid_ny);
    r.get("solid.r_in", c.annulus_r_in);
    r.get("solid.r_out", c.annulus_r_out);
    r.get("solid.x0", c.solid_rect.x0);
    r.get("solid.x1", c.solid_rect.x1);
    r.get("solid.y0", c.solid_rect.y0);
    r.get("solid.y1", c.solid_rect.y1);
    r.get("physics.rho", c.rho);
    r.get("physics.nu", c.nu);
    if (auto law = r.take("physics.law")) {
        if (*law == "linear")
            c.law.kind = MaterialLaw::Kind::Linear;
        else if (*law == "exponential")
            c.law.kind = MaterialLaw::Kind::Exponential;
        else
            errors.push_back("physics.law: unknown law \"" + *law + "\"");
    }
    r.get("physics.kappa", c.law.kappa);
    r.get("physics.gamma", c.law.gamma);
    r.get("physics.eta", c.law.eta);
    if (auto conv = r.take("physics.exp_convention")) {
        if (*conv == "shifted_trace")
            c.law.exp_arg = MaterialLaw::ExpArg::ShiftedTrace;
        else if (*conv == "raw")
            c.law.exp_arg = MaterialLaw::ExpArg::RawExponent;
        else
            errors.push_back("physics.exp_convention: expected shifted_trace or raw");
    }
    r.get("time.dt", c.dt);
    r.get("time.T", c.T);
    if (auto coup = r.take("solver.coupling")) {
        if (*coup == "vertex")
            c.coupling = CouplingStrategy::VertexRule;
        else if (*coup == "intersection")
            c.coupling = CouplingStrategy::Intersection;
        else
            errors.push_back("solver.coupling: expected vertex or intersection");
    }
    if (auto rule = r.take("solver.triangle_rule")) {
        if (*rule == "degree6")
            c.triangle_rule = RuleKind::TriangleDegree6;
        else if (*rule == "degree3")
            c.triangle_rule = RuleKind::Triangle4pt;
        else
            errors.push_back("solver.triangle_rule: expected degree6 or degree3");
    }
    if (auto pk = r.take("solver.precon")) {
        if (*pk == "tri")
            c.precon = PreconKind::BlockTri;
        else if (*pk == "diag")
            c.precon = PreconKind::BlockDiag;
        else
            errors.push_back("solver.precon: expected tri or diag");
    }
    r.get("solver.gmres_tol", c.gmres_tol);
    r.get("solver.gmres_restart", c.gmres_restart);
    r.get("solver.gmres_max_it", c.gmres_max_it);
    r.get("solver.newton_tol", c.newton_tol);
    r.get("solver.newton_max_it", c.newton_max_it);
    r.get("run.threads", c.threads);
    if (auto v = r.take("run.out_dir")) c.out_dir = *v;
    r.get("run.snapshot_stride", c.snapshot_stride);
    r.get("run.write_vtk", c.write_vtk);
    r.get("run.raw_fields", c.raw_fields);
    r.get("run.bar_force", c.bar_force);
    r.get("run.dump_system_step", c.dump_system_step);

    for (const auto& [key, value] : r.kv) errors.push_back(key + ": unknown key");
    errors.insert(errors.end(), r.errors.begin(), r.errors.end());

    const auto invalid = validate_config(c);
    errors.insert(errors.end(), invalid.begin(), invalid.end());
    return c;
}

} // namespace

SimConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides) {
    auto kv = parse_toml_text(text);
    for (const std::string& ov : overrides) {
        const std::size_t eq = ov.find('=');
        if (eq == std::string::npos) throw IoError("override \"" + ov + "\": expected key=value");
        std::string key = trim(ov.substr(0, eq));
        if (key == "preset") key = "scenario";
        kv[key] = trim(ov.substr(eq + 1));
    }
    std::vector<std::string> errors;
    SimConfig c = build_config(std::move(kv), errors);
    if (!errors.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& e : errors) msg += "\n  - " + e;
        throw IoError(msg);
    }
    return c;
}

SimConfig parse_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::string text;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open config file " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    return parse_config_text(text, overrides);
}

namespace {
std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
} // namespace

std::string emit_config(const SimConfig& c) {
    std::ostringstream out;
    out << "scenario = \"" << to_string(c.scenario) << "\"\n\n";
    out << "[fluid]\n";
    out << "nx = " << c.fluid_nx << "\nny = " << c.fluid_ny << "\n";
    out << "x0 = " << fmt(c.fluid_box.x0) << "\nx1 = " << fmt(c.fluid_box.x1) << "\n";
    out << "y0 = " << fmt(c.fluid_box.y0) << "\ny1 = " << fmt(c.fluid_box.y1) << "\n\n";
    out << "[solid]\n";
    out << "nx = " << c.solid_nx << "\nny = " << c.solid_ny << "\n";
    if (c.scenario == Scenario::Bar) {
        out << "x0 = " << fmt(c.solid_rect.x0) << "\nx1 = " << fmt(c.solid_rect.x1) << "\n";
        out << "y0 = " << fmt(c.solid_rect.y0) << "\ny1 = " << fmt(c.solid_rect.y1) << "\n\n";
    } else {
        out << "r_in = " << fmt(c.annulus_r_in) << "\nr_out = " << fmt(c.annulus_r_out) << "\n\n";
    }
    out << "[physics]\n";
    out << "rho = " << fmt(c.rho) << "\nnu = " << fmt(c.nu) << "\n";
    if (c.law.kind == MaterialLaw::Kind::Linear) {
        out << "law = \"linear\"\nkappa = " << fmt(c.law.kappa) << "\n\n";
    } else {
        out << "law = \"exponential\"\ngamma = " << fmt(c.law.gamma)
            << "\neta = " << fmt(c.law.eta) << "\n";
        out << "exp_convention = \""
            << (c.law.exp_arg == MaterialLaw::ExpArg::ShiftedTrace ? "shifted_trace" : "raw")
            << "\"\n\n";
    }
    out << "[time]\n";
    out << "dt = " << fmt(c.dt) << "\nT = " << fmt(c.T) << "\n\n";
    out << "[solver]\n";
    out << "coupling = \"" << to_string(c.coupling) << "\"\n";
    out << "triangle_rule = \""
        << (c.triangle_rule == RuleKind::TriangleDegree6 ? "degree6" : "degree3") << "\"\n";
    out << "precon = \"" << to_string(c.precon) << "\"\n";
    out << "gmres_tol = " << fmt(c.gmres_tol) << "\ngmres_restart = " << c.gmres_restart
        << "\ngmres_max_it = " << c.gmres_max_it << "\n";
    out << "newton_tol = " << fmt(c.newton_tol) << "\nnewton_max_it = " << c.newton_max_it
        << "\n\n";
    out << "[run]\n";
    out << "threads = " << c.threads << "\n";
    out << "out_dir = \"" << c.out_dir << "\"\n";
    out << "snapshot_stride = " << c.snapshot_stride << "\n";
    out << "write_vtk = " << (c.write_vtk ? "true" : "false") << "\n";
    out << "raw_fields = " << (c.raw_fields ? "true" : "false") << "\n";
    out << "bar_force = " << fmt(c.bar_force) << "\n";
    out << "dump_system_step = " << c.dump_system_step << "\n";
    return out.str();
}

std::string to_string(Scenario s) {
    switch (s) {
    case Scenario::Annulus: return "annulus";
    case Scenario::Bar: return "bar";
    case Scenario::Custom: return "custom";
    }
    return "?";
}

std::string to_string(CouplingStrategy s) {
    return s == CouplingStrategy::VertexRule ? "vertex" : "intersection";
}

std::string to_string(PreconKind p) { return p == PreconKind::BlockTri ? "tri" : "diag"; }

} // namespace fsidlm
