#include "cascade/case_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace cascade {

namespace {

std::string strip_comments(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        auto pos = line.find('%');
        if (pos != std::string::npos) line.erase(pos);
        out += line;
        out += '\n';
    }
    return out;
}

using Matrix = std::vector<std::vector<double>>;

/// Extracts `mpc.<name> = [ ... ];` as rows of numbers. Rows end at ';' or
/// newline. Returns false when the block is absent.
bool extract_matrix(const std::string& text, const std::string& name, Matrix& out) {
    const std::string key = "mpc." + name;
    size_t pos = 0;
    while ((pos = text.find(key, pos)) != std::string::npos) {
        size_t after = pos + key.size();
        // must be followed by '=' (possibly spaces), not a longer identifier
        if (after < text.size() && (std::isalnum(static_cast<unsigned char>(text[after])) || text[after] == '_')) {
            pos = after;
            continue;
        }
        size_t eq = text.find('=', after);
        if (eq == std::string::npos) return false;
        size_t open = text.find('[', eq);
        if (open == std::string::npos)
            throw MalformedCase("expected '[' after " + key);
        size_t close = text.find(']', open);
        if (close == std::string::npos)
            throw MalformedCase("unterminated matrix block " + key);
        std::string body = text.substr(open + 1, close - open - 1);
        for (char& c : body)
            if (c == ';') c = '\n';
        std::istringstream rows(body);
        std::string row;
        out.clear();
        while (std::getline(rows, row)) {
            std::istringstream fields(row);
            std::vector<double> vals;
            std::string tok;
            while (fields >> tok) {
                try {
                    size_t used = 0;
                    double v = std::stod(tok, &used);
                    if (used != tok.size())
                        throw MalformedCase("bad numeric token '" + tok + "' in " + key);
                    vals.push_back(v);
                } catch (const MalformedCase&) {
                    throw;
                } catch (const std::exception&) {
                    throw MalformedCase("bad numeric token '" + tok + "' in " + key);
                }
            }
            if (!vals.empty()) out.push_back(std::move(vals));
        }
        return true;
    }
    return false;
}

bool extract_scalar(const std::string& text, const std::string& name, double& out) {
    const std::string key = "mpc." + name;
    size_t pos = text.find(key);
    if (pos == std::string::npos) return false;
    size_t eq = text.find('=', pos);
    if (eq == std::string::npos) return false;
    std::istringstream in(text.substr(eq + 1));
    if (!(in >> out)) throw MalformedCase("bad scalar value for " + key);
    return true;
}

void warn(std::vector<std::string>* warnings, const std::string& msg) {
    if (warnings) warnings->push_back(msg);
}

} // namespace

Network parse_case_text(const std::string& raw, const CaseOptions& opts,
                        std::vector<std::string>* warnings) {
    const std::string text = strip_comments(raw);
    Network net;

    double base = 0.0;
    if (extract_scalar(text, "baseMVA", base)) {
        if (base <= 0.0) throw MalformedCase("baseMVA must be positive");
        net.base_mva = base;
    } else {
        warn(warnings, "baseMVA missing, assuming 100 MVA");
        net.base_mva = 100.0;
    }
    double freq = 0.0;
    if (extract_scalar(text, "nominal_freq", freq)) net.nominal_freq = freq;

    Matrix bus, gen, branch, gencost;
    if (!extract_matrix(text, "bus", bus)) throw MalformedCase("mpc.bus block missing");
    if (!extract_matrix(text, "branch", branch)) throw MalformedCase("mpc.branch block missing");
    if (!extract_matrix(text, "gen", gen)) throw MalformedCase("mpc.gen block missing");
    const bool have_cost = extract_matrix(text, "gencost", gencost);

    LoadId next_load = 1;
    for (const auto& row : bus) {
        if (row.size() < 10)
            throw MalformedCase("bus row needs at least 10 columns, got " +
                                std::to_string(row.size()));
        Bus b;
        b.id = static_cast<BusId>(row[0]);
        b.base_kv = row[9];
        b.area = static_cast<int>(row[6]);
        net.buses.push_back(b);
        const double pd = row[2];
        if (pd > 0.0) {
            Load l;
            l.id = next_load++;
            l.bus = b.id;
            l.p_demand = pd / net.base_mva;
            net.loads.push_back(l);
        } else if (pd < 0.0) {
            warn(warnings, "bus " + std::to_string(b.id) + ": negative Pd ignored");
        }
    }

    for (size_t i = 0; i < branch.size(); ++i) {
        const auto& row = branch[i];
        if (row.size() < 6)
            throw MalformedCase("branch row needs at least 6 columns");
        Branch br;
        br.id = static_cast<BranchId>(i) + 1;
        br.from_bus = static_cast<BusId>(row[0]);
        br.to_bus = static_cast<BusId>(row[1]);
        br.reactance_x = row[3];
        double rate_mw = row[5];
        if (rate_mw < 0.0) throw MalformedCase("branch " + std::to_string(br.id) + ": negative rateA");
        if (rate_mw == 0.0) {
            br.rating = opts.unlimited_rating_pu;
            br.rating_is_sentinel = true;
            warn(warnings, "branch " + std::to_string(br.id) +
                               ": rateA 0 treated as unlimited (" +
                               std::to_string(opts.unlimited_rating_pu) + " pu)");
        } else {
            br.rating = rate_mw / net.base_mva;
        }
        br.in_service = row.size() < 11 || row[10] != 0.0;
        net.branches.push_back(br);
    }

    for (size_t i = 0; i < gen.size(); ++i) {
        const auto& row = gen[i];
        if (row.size() < 10)
            throw MalformedCase("gen row needs at least 10 columns");
        Generator g;
        g.id = static_cast<GenId>(i) + 1;
        g.bus = static_cast<BusId>(row[0]);
        g.p_set = row[1] / net.base_mva;
        g.mbase = row[6] > 0.0 ? row[6] : net.base_mva;
        g.in_service = row[7] != 0.0;
        g.p_max = row[8] / net.base_mva;
        g.p_min = row[9] / net.base_mva;
        if (g.p_min > g.p_max)
            throw MalformedCase("gen " + std::to_string(g.id) + ": Pmin > Pmax");
        if (g.p_set < g.p_min || g.p_set > g.p_max) {
            warn(warnings, "gen " + std::to_string(g.id) + ": Pg outside [Pmin,Pmax], clamped");
            g.p_set = std::clamp(g.p_set, g.p_min, g.p_max);
        }
        if (have_cost && i < gencost.size()) {
            const auto& cr = gencost[i];
            // polynomial model: [2 startup shutdown n c_{n-1} ... c_0]
            if (cr.size() >= 5 && cr[0] == 2.0) {
                const int n = static_cast<int>(cr[3]);
                if (static_cast<int>(cr.size()) >= 4 + n && n >= 2)
                    g.cost_linear = cr[4 + n - 2]; // linear coefficient
            } else {
                warn(warnings, "gencost row " + std::to_string(i + 1) +
                                   ": unsupported model, using default cost");
            }
        }
        net.generators.push_back(g);
    }

    net.validate();
    if (net.total_demand_pu() <= 0.0)
        throw MalformedCase("case has no demand");
    return net;
}

Network load_case(const std::string& path, const CaseOptions& opts,
                  std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) throw MalformedCase("cannot open case file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_case_text(buf.str(), opts, warnings);
}

void apply_dynamic_sidecar_text(Network& net, const std::string& text,
                                std::vector<std::string>* warnings) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        std::string tok;
        Generator* gen = nullptr;
        Load* load = nullptr;
        while (fields >> tok) {
            auto eq = tok.find('=');
            if (eq == std::string::npos)
                throw MalformedCase("sidecar line " + std::to_string(lineno) +
                                    ": expected key=value, got '" + tok + "'");
            const std::string key = tok.substr(0, eq);
            const std::string val = tok.substr(eq + 1);
            double num = 0.0;
            try {
                num = std::stod(val);
            } catch (const std::exception&) {
                throw MalformedCase("sidecar line " + std::to_string(lineno) +
                                    ": bad value '" + val + "'");
            }
            if (key == "gen") {
                gen = &net.generator(static_cast<GenId>(num));
                load = nullptr;
            } else if (key == "load") {
                load = &net.load(static_cast<LoadId>(num));
                gen = nullptr;
            } else if (gen) {
                if (key == "inertia_h") {
                    if (num <= 0.0) throw InvalidInertia("sidecar gen " + std::to_string(gen->id));
                    gen->inertia_h = num;
                } else if (key == "damping_d") {
                    gen->damping_d = num;
                } else if (key == "droop_r") {
                    if (num <= 0.0) throw InvalidDroop("sidecar gen " + std::to_string(gen->id));
                    gen->droop_r = num;
                } else if (key == "gov_tc") {
                    gen->gov_tc = num;
                } else if (key == "xd_prime") {
                    gen->xd_prime = num;
                } else {
                    warn(warnings, "sidecar line " + std::to_string(lineno) +
                                       ": unknown gen key '" + key + "'");
                }
            } else if (load) {
                if (key == "kf") {
                    load->freq_sensitivity_kf = num;
                } else {
                    warn(warnings, "sidecar line " + std::to_string(lineno) +
                                       ": unknown load key '" + key + "'");
                }
            } else {
                throw MalformedCase("sidecar line " + std::to_string(lineno) +
                                    ": key '" + key + "' before gen=/load=");
            }
        }
    }
    net.validate();
}

void apply_dynamic_sidecar(Network& net, const std::string& path,
                           std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) throw MalformedCase("cannot open sidecar file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    apply_dynamic_sidecar_text(net, buf.str(), warnings);
}

} // namespace cascade
