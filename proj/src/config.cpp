#include "qttlab/config.hpp"

#include "qttlab/error.hpp"

#include <charconv>
#include <set>
#include <string>

namespace qttlab {

namespace {

std::string_view trim(std::string_view s)
{
    const auto ws = " \t\r\f\v";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

std::string at_line(int line, const std::string& msg)
{
    return "line " + std::to_string(line) + ": " + msg;
}

// Read-once view of one section; leftover keys are reported as unknown.
class Section {
public:
    Section(const ConfigTree& tree, std::string name) : name_(std::move(name))
    {
        if (auto it = tree.find(name_); it != tree.end()) sec_ = &it->second;
    }

    bool present() const { return sec_ != nullptr; }
    bool has(const std::string& key) const { return sec_ && sec_->count(key); }

    const ConfigValue* get(const std::string& key)
    {
        if (!sec_) return nullptr;
        auto it = sec_->find(key);
        if (it == sec_->end()) return nullptr;
        used_.insert(key);
        return &it->second;
    }

    void number(const std::string& key, double& out)
    {
        if (const auto* v = get(key)) out = parse_double(key, *v);
    }

    void integer(const std::string& key, std::uint64_t& out)
    {
        if (const auto* v = get(key)) out = parse_u64(key, *v);
    }

    void integer(const std::string& key, std::int64_t& out)
    {
        if (const auto* v = get(key)) {
            std::int64_t x = 0;
            const auto& t = v->text;
            auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
            if (ec != std::errc() || p != t.data() + t.size()) fail(key, *v, "expects an integer");
            out = x;
        }
    }

    void boolean(const std::string& key, bool& out)
    {
        if (const auto* v = get(key)) {
            if (v->text == "true" || v->text == "yes" || v->text == "1") out = true;
            else if (v->text == "false" || v->text == "no" || v->text == "0") out = false;
            else fail(key, *v, "expects true or false");
        }
    }

    void text(const std::string& key, std::string& out)
    {
        if (const auto* v = get(key)) out = v->text;
    }

    [[noreturn]] void fail(const std::string& key, const ConfigValue& v, const std::string& what) const
    {
        throw ConfigError(at_line(v.line, "[" + name_ + "] " + key + " " + what));
    }

    void finish() const
    {
        if (!sec_) return;
        for (const auto& [k, v] : *sec_)
            if (!used_.count(k))
                throw ConfigError(at_line(v.line, "unknown key '" + k + "' in [" + name_ + "]"));
    }

    double parse_double(const std::string& key, const ConfigValue& v) const
    {
        double x = 0.0;
        const auto& t = v.text;
        auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
        if (ec != std::errc() || p != t.data() + t.size()) fail(key, v, "expects a number");
        return x;
    }

    std::uint64_t parse_u64(const std::string& key, const ConfigValue& v) const
    {
        std::uint64_t x = 0;
        const auto& t = v.text;
        auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
        if (ec != std::errc() || p != t.data() + t.size())
            fail(key, v, "expects a non-negative integer");
        return x;
    }

private:
    std::string name_;
    const ConfigSection* sec_ = nullptr;
    std::set<std::string> used_;
};

ConfigTree expand_presets(ConfigTree tree, int depth)
{
    auto camp = tree.find("campaign");
    if (camp == tree.end()) return tree;
    auto p = camp->second.find("preset");
    if (p == camp->second.end()) return tree;
    if (depth > 8) throw ConfigError(at_line(p->second.line, "preset chain too deep"));
    const std::string name = p->second.text;
    const int line = p->second.line;
    camp->second.erase(p);

    ConfigTree base;
    try {
        base = expand_presets(parse_config_tree(preset_text(name)), depth + 1);
    } catch (const ConfigError& e) {
        throw ConfigError(at_line(line, e.what()));
    }
    for (auto& [sname, sec] : tree)
        for (auto& [k, v] : sec) base[sname][k] = v;
    return base;
}

void read_clock(Section s, ClockModel& m, const std::string& label)
{
    std::string kind;
    s.text("kind", kind);
    if (!kind.empty()) {
        if (kind == "hmaser") m = hydrogen_maser(label);
        else if (kind == "rb") m = rubidium_clock(label);
        else if (kind == "ideal") m = ideal_clock(label);
        else s.fail("kind", *s.get("kind"), "must be hmaser, rb or ideal");
    }
    m.label = label;
    s.number("initial_offset_s", m.initial_offset_s);
    s.number("frac_freq_offset", m.frac_freq_offset);
    s.number("freq_drift_per_s", m.freq_drift_per_s);

    static const std::pair<const char*, int> kTerms[] = {
        {"h_m2", -2}, {"h_m1", -1}, {"h_0", 0}, {"h_p1", 1}, {"h_p2", 2}};
    for (const auto& [key, alpha] : kTerms) {
        if (!s.has(key)) continue;
        double h = 0.0;
        s.number(key, h);
        std::erase_if(m.noise, [a = alpha](const NoiseComponent& c) { return c.alpha == a; });
        if (h != 0.0) m.noise.push_back({alpha, h});
    }
    s.finish();
}

void read_source(Section s, PairSourceSpec& src)
{
    PairSourceSpec nominal = src;
    nominal.pump_nm = 780.0;
    nominal.signal_center_nm = 1560.0;
    double center = src.signal_center_nm;
    std::string tuning = "common";

    s.number("nominal_pump_nm", nominal.pump_nm);
    s.number("nominal_signal_nm", nominal.signal_center_nm);
    s.number("signal_center_nm", center);
    s.number("bandwidth_fwhm_nm", nominal.signal_bandwidth_fwhm_nm);
    s.number("pair_rate", nominal.pair_rate);
    s.number("correlation_jitter_fwhm_ps", nominal.correlation_jitter_fwhm_ps);
    s.number("center_uncertainty_nm", nominal.signal_center_uncertainty_nm);
    s.text("tuning", tuning);

    if (tuning == "common") {
        src = tune_source(nominal, center, Tuning::CommonMode);
    } else if (tuning == "fixed_pump") {
        src = tune_source(nominal, center, Tuning::FixedPump);
    } else if (tuning == "explicit") {
        const auto* v = s.get("pump_nm");
        if (!v) throw ConfigError("source " + src.label + ": tuning = explicit requires pump_nm");
        src = nominal;
        src.signal_center_nm = center;
        src.pump_nm = s.parse_double("pump_nm", *v);
    } else {
        s.fail("tuning", *s.get("tuning"), "must be common, fixed_pump or explicit");
    }
    s.finish();
}

void read_detector(Section s, DetectorSpec& d)
{
    s.number("efficiency", d.efficiency);
    s.number("jitter_fwhm_ps", d.jitter_fwhm_ps);
    s.number("dark_rate", d.dark_rate);
    s.number("dead_time_ns", d.dead_time_ns);
    s.finish();
}

Scenario resolve(const ConfigTree& tree)
{
    static const char* kKnownSections[] = {
        "campaign", "clocks", "clock_a", "clock_b", "transfer", "source_a", "source_b", "link",
        "fbg", "detector", "detector.D1", "detector.D2", "detector.D3", "detector.D4", "timer",
        "correlation", "ambient"};
    for (const auto& [name, sec] : tree) {
        bool known = false;
        for (const char* k : kKnownSections) known = known || name == k;
        if (!known) {
            const int line = sec.empty() ? 0 : sec.begin()->second.line;
            throw ConfigError(at_line(line, "unknown section [" + name + "]"));
        }
    }

    std::string missing;
    for (const char* req : {"campaign", "clocks", "source_a", "source_b", "link"})
        if (!tree.count(req)) missing += std::string(missing.empty() ? "" : ", ") + "[" + req + "]";
    if (!missing.empty()) throw ConfigError("missing required sections: " + missing);

    Scenario sc;

    {
        Section s(tree, "campaign");
        s.text("name", sc.name);
        std::uint64_t n = sc.n_runs;
        s.integer("n_runs", n);
        sc.n_runs = static_cast<std::size_t>(n);
        s.integer("master_seed", sc.master_seed);
        s.integer("start_epoch_s", sc.start_epoch_s);
        s.boolean("fast_thinning", sc.fast_thinning);
        s.finish();
    }
    {
        Section s(tree, "clocks");
        std::string mode;
        s.text("mode", mode);
        if (mode == "common" || mode.empty()) sc.clock_mode = ClockMode::Common;
        else if (mode == "independent") sc.clock_mode = ClockMode::Independent;
        else if (mode == "transfer") sc.clock_mode = ClockMode::Transfer;
        else s.fail("mode", *s.get("mode"), "must be common, independent or transfer");
        s.number("tau0_s", sc.clock_tau0_s);
        s.finish();
    }
    read_clock(Section(tree, "clock_a"), sc.clock_a, "clock_a");
    read_clock(Section(tree, "clock_b"), sc.clock_b, "clock_b");
    {
        Section s(tree, "transfer");
        auto& t = sc.transfer;
        s.number("white_pm_adev_1s", t.white_pm_adev_1s);
        s.number("floor_adev", t.floor_adev);
        s.number("sine_amplitude_s", t.sine_amplitude_s);
        s.number("sine_period_s", t.sine_period_s);
        s.number("sine_phase_rad", t.sine_phase_rad);
        s.number("epoch_offset_s", t.epoch_offset_s);
        s.finish();
    }
    read_source(Section(tree, "source_a"), sc.source_a);
    read_source(Section(tree, "source_b"), sc.source_b);
    {
        Section s(tree, "link");
        auto& l = sc.link;
        auto& f = l.fiber;
        s.boolean("fiber", l.fiber_enabled);
        s.number("length_km", f.length_km);
        s.number("dispersion_ps_nm_km", f.dispersion_ps_nm_km);
        s.number("loss_db_km", f.loss_db_km);
        s.number("group_delay_ps_km", f.group_delay_ps_km);
        s.number("ref_wavelength_nm", f.ref_wavelength_nm);
        s.number("temp_delay_ps_km_K", f.temp_delay_ps_km_K);
        s.number("temp_dispersion_ps_nm_km_K", f.temp_dispersion_ps_nm_km_K);
        s.number("signal_extra_loss_db", l.signal_extra_loss_db);
        s.number("idler_extra_loss_db", l.idler_extra_loss_db);
        s.number("common_extra_delay_ps", l.common_extra_delay_ps);
        s.number("local_delay_a_ps", l.local_delay_a_ps);
        s.number("local_delay_b_ps", l.local_delay_b_ps);
        s.finish();
    }
    {
        Section s(tree, "fbg");
        auto& l = sc.link;
        s.boolean("enabled", l.fbg_enabled);
        std::string placement;
        s.text("placement", placement);
        if (placement == "idler" || placement.empty()) l.fbg_placement = FbgPlacement::Idler;
        else if (placement == "signal") l.fbg_placement = FbgPlacement::Signal;
        else s.fail("placement", *s.get("placement"), "must be idler or signal");
        s.number("dispersion_ps_nm", l.fbg_dispersion_ps_nm);
        s.number("delay_ps", l.fbg_delay_ps);
        s.number("loss_db", l.fbg_loss_db);
        s.number("delay_asymmetry_ps", l.fbg_delay_asymmetry_ps);
        s.number("dispersion_asymmetry_ps_nm", l.fbg_dispersion_asymmetry_ps_nm);
        s.finish();
    }
    {
        DetectorSpec base;
        read_detector(Section(tree, "detector"), base);
        for (int i = 0; i < 4; ++i) {
            const std::string label = "D" + std::to_string(i + 1);
            DetectorSpec d = base;
            d.label = label;
            read_detector(Section(tree, "detector." + label), d);
            sc.detectors[i] = d;
        }
    }
    {
        Section s(tree, "timer");
        auto& t = sc.timer;
        s.number("lsb_ps", t.lsb_ps);
        s.number("record_length_s", t.record_length_s);
        s.number("cycle_period_s", t.cycle_period_s);
        s.number("max_rate", t.max_rate);
        s.text("reference", t.reference);
        s.finish();
    }
    {
        Section s(tree, "correlation");
        auto& c = sc.correlation;
        s.number("coarse_bin_ps", c.coarse_bin_ps);
        s.number("search_span_ps", c.search_span_ps);
        s.number("fine_bin_ps", c.fine_bin_ps);
        s.number("fine_span_ps", c.fine_span_ps);
        s.number("significance", c.significance);
        s.finish();
    }
    {
        Section s(tree, "ambient");
        auto& a = sc.ambient;
        s.number("mean_temp_K", a.mean_temp_K);
        s.number("amplitude_K", a.amplitude_K);
        s.number("period_s", a.period_s);
        s.number("phase_rad", a.phase_rad);
        s.finish();
    }

    sc.build_paths();
    sc.validate();
    return sc;
}

}  // namespace

ConfigTree parse_config_tree(std::string_view text)
{
    ConfigTree tree;
    std::string section;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;

        if (auto c = line.find_first_of("#;"); c != std::string_view::npos) line = line.substr(0, c);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(at_line(line_no, "unterminated section header"));
            auto name = trim(line.substr(1, line.size() - 2));
            if (name.empty()) throw ConfigError(at_line(line_no, "empty section name"));
            section = std::string(name);
            tree[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(at_line(line_no, "expected 'key = value'"));
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(at_line(line_no, "missing key before '='"));
        if (value.empty()) throw ConfigError(at_line(line_no, "missing value for '" + std::string(key) + "'"));
        if (section.empty())
            throw ConfigError(at_line(line_no, "'" + std::string(key) + "' appears before any [section]"));
        tree[section][std::string(key)] = ConfigValue{std::string(value), line_no};
    }
    return tree;
}

Scenario parse_config(std::string_view text)
{
    return resolve(expand_presets(parse_config_tree(text), 0));
}

}  // namespace qttlab
