#include "noprop/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace noprop {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
    throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
}

double parse_number(const std::string& raw, const std::string& origin, int line,
                    const std::string& key) {
    const char* b = raw.data();
    const char* e = raw.data() + raw.size();
    double v{};
    const auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc{} || res.ptr != e)
        fail(origin, line, "value of '" + key + "' is not a number: '" + raw + "'");
    return v;
}

std::int64_t parse_integer(const std::string& raw, const std::string& origin, int line,
                           const std::string& key) {
    std::int64_t v{};
    const auto res = std::from_chars(raw.data(), raw.data() + raw.size(), v);
    if (res.ec != std::errc{} || res.ptr != raw.data() + raw.size())
        fail(origin, line, "value of '" + key + "' is not an integer: '" + raw + "'");
    return v;
}

std::uint64_t parse_unsigned(const std::string& raw, const std::string& origin, int line,
                             const std::string& key) {
    std::uint64_t v{};
    const auto res = std::from_chars(raw.data(), raw.data() + raw.size(), v);
    if (res.ec != std::errc{} || res.ptr != raw.data() + raw.size())
        fail(origin, line, "value of '" + key + "' is not an unsigned integer: '" + raw + "'");
    return v;
}

std::vector<double> parse_list(const std::string& raw, const std::string& origin, int line,
                               const std::string& key) {
    std::string s = trim(raw);
    if (s.size() < 2 || s.front() != '[' || s.back() != ']')
        fail(origin, line, "value of '" + key + "' must be a [list]");
    s = s.substr(1, s.size() - 2);
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) fail(origin, line, "empty element in list '" + key + "'");
        out.push_back(parse_number(item, origin, line, key));
    }
    return out;
}

std::vector<std::vector<double>> parse_matrix(const std::string& raw, const std::string& origin,
                                              int line, const std::string& key) {
    std::string s = trim(raw);
    if (s.size() < 4 || s.front() != '[' || s.back() != ']')
        fail(origin, line, "value of '" + key + "' must be a [[matrix]]");
    s = s.substr(1, s.size() - 2);
    std::vector<std::vector<double>> rows;
    std::size_t pos = 0;
    while (pos < s.size()) {
        const auto open = s.find('[', pos);
        if (open == std::string::npos) break;
        const auto close = s.find(']', open);
        if (close == std::string::npos)
            fail(origin, line, "unbalanced brackets in matrix '" + key + "'");
        rows.push_back(parse_list(s.substr(open, close - open + 1), origin, line, key));
        pos = close + 1;
    }
    if (rows.empty()) fail(origin, line, "matrix '" + key + "' is empty");
    for (const auto& r : rows)
        if (r.size() != rows.front().size())
            fail(origin, line, "matrix '" + key + "' has ragged rows");
    return rows;
}

void apply_kv(RunConfig& cfg, const std::string& section, const std::string& key,
              const std::string& raw, const std::string& origin, int line) {
    const std::string full = section + "." + key;
    if (cfg.explicit_keys.count(full))
        fail(origin, line, "key '" + full + "' set more than once");

    if (section == "system") {
        if (key == "kind") cfg.system = raw;
        else if (key == "gamma") cfg.gamma = parse_number(raw, origin, line, full);
        else if (key == "a") cfg.ar1_a = parse_number(raw, origin, line, full);
        else if (key == "C") cfg.net_c = parse_number(raw, origin, line, full);
        else fail(origin, line, "unknown key '" + full + "'");
    } else if (section == "noise") {
        if (key == "kind") cfg.noise_kind = raw;
        else if (key == "sigma") cfg.sigma = parse_number(raw, origin, line, full);
        else if (key == "sigma_diag") cfg.sigma_diag = parse_list(raw, origin, line, full);
        else if (key == "cov") cfg.cov = parse_matrix(raw, origin, line, full);
        else fail(origin, line, "unknown key '" + full + "'");
    } else if (section == "estimator") {
        if (key == "method") cfg.method = raw;
        else if (key == "L") cfg.L = parse_integer(raw, origin, line, full);
        else if (key == "W") cfg.W = static_cast<int>(parse_integer(raw, origin, line, full));
        else if (key == "T") cfg.T = static_cast<int>(parse_integer(raw, origin, line, full));
        else if (key == "M_pre") cfg.m_pre = parse_integer(raw, origin, line, full);
        else if (key == "seed") cfg.seed = parse_unsigned(raw, origin, line, full);
        else if (key == "phi") cfg.phi = raw;
        else if (key == "fd_dgamma") cfg.fd_dgamma = parse_number(raw, origin, line, full);
        else if (key == "fd_mode") cfg.fd_mode = raw;
        else if (key == "grid_bins")
            cfg.grid_bins = static_cast<int>(parse_integer(raw, origin, line, full));
        else if (key == "grid_dgamma") cfg.grid_dgamma = parse_number(raw, origin, line, full);
        else if (key == "n_max") cfg.n_max = static_cast<int>(parse_integer(raw, origin, line, full));
        else if (key == "kernel_sigma") cfg.kernel_sigma = parse_number(raw, origin, line, full);
        else if (key == "n_gammas")
            cfg.n_gammas = static_cast<int>(parse_integer(raw, origin, line, full));
        else fail(origin, line, "unknown key '" + full + "'");
    } else if (section == "sweep") {
        if (key == "gammas") cfg.gammas = parse_list(raw, origin, line, full);
        else if (key == "gamma_min") {
            cfg.gamma_min = parse_number(raw, origin, line, full);
            cfg.has_gamma_range = true;
        } else if (key == "gamma_max") {
            cfg.gamma_max = parse_number(raw, origin, line, full);
            cfg.has_gamma_range = true;
        } else if (key == "gamma_step") {
            cfg.gamma_step = parse_number(raw, origin, line, full);
            cfg.has_gamma_range = true;
        } else fail(origin, line, "unknown key '" + full + "'");
    } else if (section == "study") {
        if (key == "kind") cfg.study_kind = raw;
        else if (key == "repeats")
            cfg.repeats = static_cast<int>(parse_integer(raw, origin, line, full));
        else fail(origin, line, "unknown key '" + full + "'");
    } else {
        fail(origin, line, "unknown section '" + section + "'");
    }
    cfg.explicit_keys.insert(full);
}

} // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(origin, lineno, "malformed section header '" + line + "'");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) fail(origin, lineno, "empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            fail(origin, lineno, "expected 'key = value', got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) fail(origin, lineno, "empty key");
        if (value.empty()) fail(origin, lineno, "empty value for key '" + key + "'");
        if (section.empty()) fail(origin, lineno, "key '" + key + "' outside any [section]");
        apply_kv(cfg, section, key, value, origin, lineno);
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

} // namespace

RunConfig resolve_and_validate(RunConfig cfg) {
    require(cfg.system == "tent" || cfg.system == "chaotic_net" || cfg.system == "ar1",
            "system.kind must be one of tent, chaotic_net, ar1 (got '" + cfg.system + "')");

    // published per-system defaults for keys the user left unset
    if (cfg.system == "tent") {
        if (!cfg.is_set("system.gamma")) cfg.gamma = 3.0;
        if (!cfg.is_set("noise.sigma")) cfg.sigma = 0.1;
        if (!cfg.is_set("estimator.phi")) cfg.phi = "x";
    } else if (cfg.system == "chaotic_net") {
        if (!cfg.is_set("system.gamma")) cfg.gamma = 0.0;
        if (!cfg.is_set("noise.sigma")) cfg.sigma = 0.5;
        if (!cfg.is_set("estimator.phi")) cfg.phi = "mean";
        if (!cfg.is_set("estimator.method")) cfg.method = "noprop-finite";
    } else { // ar1
        if (!cfg.is_set("system.gamma")) cfg.gamma = 0.3;
        if (!cfg.is_set("noise.sigma")) cfg.sigma = 0.1;
        if (!cfg.is_set("estimator.phi")) cfg.phi = "x";
    }
    cfg.explicit_keys.insert({"system.kind", "system.gamma", "noise.sigma", "estimator.phi",
                              "estimator.method"});

    require(cfg.noise_kind == "gaussian", "noise.kind must be 'gaussian'");
    const bool has_diag = !cfg.sigma_diag.empty();
    const bool has_cov = !cfg.cov.empty();
    require(!(has_diag && has_cov), "noise.sigma_diag and noise.cov are mutually exclusive");
    if (!has_diag && !has_cov)
        require(cfg.sigma > 0.0, "noise.sigma must be > 0 (got " + format_double(cfg.sigma) +
                                     "); sigma > 0 is a construction invariant");
    for (double s : cfg.sigma_diag)
        require(s > 0.0, "noise.sigma_diag entries must be > 0");
    if (has_cov)
        require(cfg.cov.size() == cfg.cov.front().size(), "noise.cov must be square");

    require(cfg.method == "noprop-stationary" || cfg.method == "noprop-finite" ||
                cfg.method == "fd" || cfg.method == "grid" || cfg.method == "ensemble" ||
                cfg.method == "kernel",
            "estimator.method must be one of noprop-stationary, noprop-finite, fd, grid, "
            "ensemble, kernel (got '" + cfg.method + "')");
    require(cfg.L >= 2, "estimator.L must be >= 2");
    require(cfg.W >= 0, "estimator.W must be >= 0");
    require(cfg.W < cfg.L, "estimator.W must be < estimator.L");
    require(cfg.T >= 1, "estimator.T must be >= 1");
    require(cfg.m_pre >= 0, "estimator.M_pre must be >= 0");
    require(cfg.phi == "x" || cfg.phi == "mean",
            "estimator.phi must be 'x' or 'mean' (got '" + cfg.phi + "')");
    require(cfg.fd_dgamma > 0.0, "estimator.fd_dgamma must be > 0");
    require(cfg.fd_mode == "stationary" || cfg.fd_mode == "finite",
            "estimator.fd_mode must be 'stationary' or 'finite'");
    require(cfg.grid_bins >= 100, "estimator.grid_bins must be >= 100");
    require(cfg.grid_dgamma > 0.0, "estimator.grid_dgamma must be > 0");
    require(cfg.n_max >= 1, "estimator.n_max must be >= 1");
    require(cfg.kernel_sigma > 0.0, "estimator.kernel_sigma must be > 0");
    require(cfg.n_gammas >= 2, "estimator.n_gammas must be >= 2");

    if (cfg.system == "ar1")
        require(std::fabs(cfg.ar1_a) < 1.0, "system.a must satisfy |a| < 1");
    if (cfg.method == "grid")
        require(cfg.system != "chaotic_net",
                "estimator.method=grid requires a 1-D system (chaotic_net is 9-D)");
    if (cfg.has_gamma_range) {
        require(cfg.gamma_step > 0.0, "sweep.gamma_step must be > 0");
        require(cfg.gamma_max >= cfg.gamma_min, "sweep.gamma_max must be >= sweep.gamma_min");
    }
    require(cfg.study_kind == "L-scaling" || cfg.study_kind == "W-scaling",
            "study.kind must be 'L-scaling' or 'W-scaling'");
    require(cfg.repeats >= 5, "study.repeats must be >= 5");
    return cfg;
}

std::string emit_config(const RunConfig& cfg) {
    std::ostringstream out;
    out << "[system]\n";
    out << "kind = " << cfg.system << "\n";
    out << "gamma = " << format_double(cfg.gamma) << "\n";
    if (cfg.system == "ar1") out << "a = " << format_double(cfg.ar1_a) << "\n";
    if (cfg.system == "chaotic_net") out << "C = " << format_double(cfg.net_c) << "\n";

    out << "\n[noise]\n";
    out << "kind = " << cfg.noise_kind << "\n";
    if (!cfg.sigma_diag.empty()) {
        out << "sigma_diag = [";
        for (std::size_t i = 0; i < cfg.sigma_diag.size(); ++i)
            out << (i ? ", " : "") << format_double(cfg.sigma_diag[i]);
        out << "]\n";
    } else if (!cfg.cov.empty()) {
        out << "cov = [";
        for (std::size_t r = 0; r < cfg.cov.size(); ++r) {
            out << (r ? ", [" : "[");
            for (std::size_t c = 0; c < cfg.cov[r].size(); ++c)
                out << (c ? ", " : "") << format_double(cfg.cov[r][c]);
            out << "]";
        }
        out << "]\n";
    } else {
        out << "sigma = " << format_double(cfg.sigma) << "\n";
    }

    out << "\n[estimator]\n";
    out << "method = " << cfg.method << "\n";
    out << "L = " << cfg.L << "\n";
    out << "W = " << cfg.W << "\n";
    out << "T = " << cfg.T << "\n";
    out << "M_pre = " << cfg.m_pre << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "phi = " << cfg.phi << "\n";
    out << "fd_dgamma = " << format_double(cfg.fd_dgamma) << "\n";
    out << "fd_mode = " << cfg.fd_mode << "\n";
    out << "grid_bins = " << cfg.grid_bins << "\n";
    out << "grid_dgamma = " << format_double(cfg.grid_dgamma) << "\n";
    out << "n_max = " << cfg.n_max << "\n";
    out << "kernel_sigma = " << format_double(cfg.kernel_sigma) << "\n";
    out << "n_gammas = " << cfg.n_gammas << "\n";

    if (!cfg.gammas.empty() || cfg.has_gamma_range) {
        out << "\n[sweep]\n";
        if (!cfg.gammas.empty()) {
            out << "gammas = [";
            for (std::size_t i = 0; i < cfg.gammas.size(); ++i)
                out << (i ? ", " : "") << format_double(cfg.gammas[i]);
            out << "]\n";
        } else {
            out << "gamma_min = " << format_double(cfg.gamma_min) << "\n";
            out << "gamma_max = " << format_double(cfg.gamma_max) << "\n";
            out << "gamma_step = " << format_double(cfg.gamma_step) << "\n";
        }
    }

    out << "\n[study]\n";
    out << "kind = " << cfg.study_kind << "\n";
    out << "repeats = " << cfg.repeats << "\n";
    return out.str();
}

SystemSpec make_system(const RunConfig& cfg) {
    if (cfg.system == "tent") return make_tent_map();
    if (cfg.system == "chaotic_net") return make_chaotic_net(cfg.net_c);
    if (cfg.system == "ar1") return make_ar1(cfg.ar1_a);
    throw ConfigError("system.kind must be one of tent, chaotic_net, ar1 (got '" + cfg.system +
                      "')");
}

GaussianNoise make_noise(const RunConfig& cfg, int dim) {
    if (!cfg.sigma_diag.empty()) {
        if (static_cast<int>(cfg.sigma_diag.size()) != dim)
            throw ConfigError("noise.sigma_diag has " + std::to_string(cfg.sigma_diag.size()) +
                              " entries but the system dimension is " + std::to_string(dim));
        Vector s(dim);
        for (int i = 0; i < dim; ++i) s[i] = cfg.sigma_diag[static_cast<std::size_t>(i)];
        return GaussianNoise::diagonal(std::move(s));
    }
    if (!cfg.cov.empty()) {
        if (static_cast<int>(cfg.cov.size()) != dim)
            throw ConfigError("noise.cov is " + std::to_string(cfg.cov.size()) + "x" +
                              std::to_string(cfg.cov.size()) + " but the system dimension is " +
                              std::to_string(dim));
        Matrix c(dim, dim);
        for (int r = 0; r < dim; ++r)
            for (int j = 0; j < dim; ++j)
                c(r, j) = cfg.cov[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)];
        return GaussianNoise::full(std::move(c));
    }
    return GaussianNoise::isotropic(dim, cfg.sigma);
}

Observable make_observable(const RunConfig& cfg, int dim) {
    return observable_by_name(cfg.phi, dim);
}

std::function<Vector(RngStream&)> make_initial_sampler(const RunConfig& cfg) {
    if (cfg.system == "tent")
        return [](RngStream& rng) {
            Vector x(1);
            x[0] = rng.next_uniform();
            return x;
        };
    if (cfg.system == "chaotic_net")
        return [](RngStream& rng) {
            Vector x(9);
            for (int i = 0; i < 9; ++i) x[i] = rng.next_normal();
            return x;
        };
    return [](RngStream& rng) {
        Vector x(1);
        x[0] = rng.next_normal();
        return x;
    };
}

std::vector<double> sweep_gammas(const RunConfig& cfg) {
    if (!cfg.gammas.empty()) return cfg.gammas;
    if (cfg.has_gamma_range) {
        const auto count = static_cast<std::int64_t>(
            std::floor((cfg.gamma_max - cfg.gamma_min) / cfg.gamma_step + 1e-9));
        std::vector<double> out;
        out.reserve(static_cast<std::size_t>(count) + 1);
        for (std::int64_t i = 0; i <= count; ++i)
            out.push_back(cfg.gamma_min + static_cast<double>(i) * cfg.gamma_step);
        return out;
    }
    return {};
}

} // namespace noprop
