#include "swarm/config.hpp"

#include <sstream>

#include "swarm/errors.hpp"
#include "swarm/io.hpp"

namespace swarm {

const std::map<std::string, std::string>& RunConfig::schema() {
    static const std::map<std::string, std::string> s = {
        {"geometry.image_size", "64"},
        {"geometry.n_angles", "90"},
        {"geometry.n_detectors", "0"}, // 0: even count covering the diagonal
        {"geometry.detector_spacing", "1"},

        {"simulate.phantom_kind", "random_ellipses"},
        {"simulate.count", "40"},
        {"simulate.noise_sigma", "0"},
        {"simulate.kept_views", "30"},
        {"simulate.export_pgm", "false"},

        {"mask.kind", "any"},
        {"mask.circle_count", "3"},
        {"mask.circle_radius", "48"},
        {"mask.strip_denominator", "5"},
        {"mask.sparse_view_choices", "10,20,30,60,90,120,180,720"},

        {"schedule.sigma_min", "0.01"},
        {"schedule.sigma_max", "auto"}, // auto: 50 * max|data|
        {"schedule.n_steps", "200"},

        {"langevin.snr", "0.16"},
        {"langevin.n_corrector_steps", "1"},

        {"train.learning_rate", "0.001"},
        {"train.batch_size", "2"},
        {"train.n_iterations", "500"},
        {"train.ema_decay", "0.99"},
        {"train.base_channels", "16"},
        {"train.channel_mult", "1,2,4,6"},
        {"train.emb_dim", "32"},
        {"train.fourier_feats", "8"},

        {"recon.mode", "swarm"},
        {"recon.kept_views", "30"},
        {"recon.items", "all"},
        {"recon.n_steps", "0"}, // 0: use schedule.n_steps
        {"recon.snapshot_every", "0"},
        {"recon.merge_every_iteration", "false"},
        {"recon.fbp_filter", "ram-lak"},
        {"recon.srm_ckpt", ""}, // empty: <out_root>/ckpt/srm.ckpt
        {"recon.shd_ckpt", ""},

        {"evaluate.view_counts", "30,60,90,120"},
        {"evaluate.methods", "fbp,swarm,srm_only,shd_only"},
        {"evaluate.check_monotone", "false"},
        {"evaluate.profile", ""}, // e.g. "row:32"

        {"check.quick", "true"},

        {"paths.out_root", "out"},
        {"seeds.root", "1234"},
    };
    return s;
}

void RunConfig::set(const std::string& key, const std::string& value) {
    if (schema().find(key) == schema().end())
        throw ConfigError("unknown config key: " + key);
    values[key] = value;
}

void RunConfig::set_kv(const std::string& assignment) {
    const auto pos = assignment.find('=');
    if (pos == std::string::npos)
        throw ConfigError("expected section.key=value, got: " + assignment);
    set(assignment.substr(0, pos), assignment.substr(pos + 1));
}

RunConfig RunConfig::from_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        // strip comments and surrounding blanks
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        auto e = line.find_last_not_of(" \t\r");
        line = line.substr(b, e - b + 1);

        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(line_no) + ": malformed section");
            section = line.substr(1, line.size() - 2);
            continue;
        }
        const auto colon = line.find(':');
        if (colon == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key: value");
        std::string key = line.substr(0, colon);
        std::string val = line.substr(colon + 1);
        while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
        while (!val.empty() && (val.front() == ' ' || val.front() == '\t')) val.erase(val.begin());
        if (section.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": key outside any section");
        cfg.set(section + "." + key, val);
    }
    return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
    return from_text(io::read_text_file(path));
}

std::string RunConfig::get(const std::string& key) const {
    auto it = values.find(key);
    if (it != values.end()) return it->second;
    auto s = schema().find(key);
    if (s == schema().end()) throw ConfigError("unknown config key: " + key);
    return s->second;
}

int RunConfig::get_int(const std::string& key) const {
    try {
        size_t used = 0;
        const std::string v = get(key);
        const int x = std::stoi(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::logic_error&) {
        throw ConfigError("config key " + key + ": expected integer, got '" + get(key) + "'");
    }
}

double RunConfig::get_double(const std::string& key) const {
    try {
        size_t used = 0;
        const std::string v = get(key);
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::logic_error&) {
        throw ConfigError("config key " + key + ": expected number, got '" + get(key) + "'");
    }
}

bool RunConfig::get_bool(const std::string& key) const {
    const std::string v = get(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key " + key + ": expected boolean, got '" + v + "'");
}

std::vector<int> RunConfig::get_int_list(const std::string& key) const {
    const std::string v = get(key);
    std::vector<int> out;
    std::string cur;
    for (char ch : v + ",") {
        if (ch == ',') {
            if (cur.empty()) continue;
            try {
                out.push_back(std::stoi(cur));
            } catch (const std::logic_error&) {
                throw ConfigError("config key " + key + ": bad integer list element '" + cur + "'");
            }
            cur.clear();
        } else if (ch != ' ') {
            cur += ch;
        }
    }
    return out;
}

} // namespace swarm
