#include "qttlab/io.hpp"

#include "qttlab/error.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace qttlab {

namespace {

constexpr std::array<char, 4> kMagic{'Q', 'T', 'T', '1'};

template <class T>
void put_le(std::vector<char>& buf, T v)
{
    using U = std::make_unsigned_t<T>;
    auto u = static_cast<U>(v);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        buf.push_back(static_cast<char>(u & 0xff));
        u = static_cast<U>(u >> 8);
    }
}

template <class T>
T get_le(const unsigned char* p)
{
    using U = std::make_unsigned_t<T>;
    U u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<U>(static_cast<U>(p[i]) << (8 * i));
    return static_cast<T>(u);
}

void read_exact(std::istream& in, unsigned char* dst, std::size_t n, const char* what)
{
    in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n)
        throw FormatError(std::string("tag file truncated in ") + what);
}

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        auto c = line.find(',', pos);
        out.push_back(line.substr(pos, c == std::string::npos ? std::string::npos : c - pos));
        if (c == std::string::npos) break;
        pos = c + 1;
    }
    if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
    return out;
}

template <class T>
T parse_field(const std::string& s, int line, const char* col)
{
    T v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw FormatError("csv line " + std::to_string(line) + ": bad value for " + col);
    return v;
}

void expect_header(std::istream& in, const std::vector<std::string>& cols)
{
    std::string line;
    if (!std::getline(in, line)) throw FormatError("csv: empty input");
    if (split_csv(line) != cols) {
        std::string want;
        for (const auto& c : cols) want += (want.empty() ? "" : ",") + c;
        throw FormatError("csv: expected header '" + want + "'");
    }
}

}  // namespace

void write_tags(const TimeTagStream& s, std::ostream& out)
{
    const double fs = s.lsb_ps * 1000.0;
    if (!(fs >= 1.0) || fs > 4294967295.0 || fs != std::round(fs))
        throw FormatError("write_tags: lsb must be a whole number of femtoseconds");
    for (std::size_t i = 1; i < s.tags.size(); ++i)
        if (s.tags[i] < s.tags[i - 1]) throw FormatError("write_tags: tags not ascending");

    std::vector<char> buf;
    buf.reserve(28 + 8 * s.tags.size());
    buf.insert(buf.end(), kMagic.begin(), kMagic.end());
    put_le<std::uint16_t>(buf, kTagFileVersion);
    put_le<std::uint16_t>(buf, s.channel);
    put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(fs));
    put_le<std::int64_t>(buf, s.record_epoch_s);
    put_le<std::uint64_t>(buf, s.tags.size());
    for (auto t : s.tags) put_le<std::int64_t>(buf, t);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw Error("write_tags: stream write failed");
}

TimeTagStream read_tags(std::istream& in)
{
    std::array<unsigned char, 28> h{};
    read_exact(in, h.data(), 4, "magic");
    if (!std::equal(kMagic.begin(), kMagic.end(), h.begin(),
                    [](char a, unsigned char b) { return static_cast<unsigned char>(a) == b; }))
        throw FormatError("tag file: bad magic");
    read_exact(in, h.data() + 4, 24, "header");
    const auto version = get_le<std::uint16_t>(h.data() + 4);
    if (version != kTagFileVersion)
        throw FormatError("tag file: unsupported version " + std::to_string(version));

    TimeTagStream s;
    s.channel = get_le<std::uint16_t>(h.data() + 6);
    const auto lsb_fs = get_le<std::uint32_t>(h.data() + 8);
    if (lsb_fs == 0) throw FormatError("tag file: zero lsb");
    s.lsb_ps = lsb_fs / 1000.0;
    s.record_epoch_s = get_le<std::int64_t>(h.data() + 12);
    const auto count = get_le<std::uint64_t>(h.data() + 20);

    // read in blocks so a corrupt count cannot force a huge allocation
    constexpr std::size_t kBlock = 1u << 16;
    std::vector<unsigned char> block;
    std::uint64_t left = count;
    while (left > 0) {
        const auto n = static_cast<std::size_t>(std::min<std::uint64_t>(left, kBlock));
        block.resize(8 * n);
        in.read(reinterpret_cast<char*>(block.data()), static_cast<std::streamsize>(block.size()));
        const auto got = static_cast<std::size_t>(in.gcount()) / 8;
        for (std::size_t i = 0; i < got; ++i) s.tags.push_back(get_le<std::int64_t>(block.data() + 8 * i));
        if (got != n)
            throw FormatError("tag file truncated: header declares " + std::to_string(count) +
                              " tags, found " + std::to_string(s.tags.size()));
        left -= n;
    }
    for (std::size_t i = 1; i < s.tags.size(); ++i)
        if (s.tags[i] < s.tags[i - 1])
            throw FormatError("tag file: tags not ascending at index " + std::to_string(i));
    return s;
}

void write_tags(const TimeTagStream& s, const std::filesystem::path& path)
{
    std::ostringstream os(std::ios::binary);
    write_tags(s, os);
    write_file(path, os.str());
}

TimeTagStream read_tags(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return read_tags(in);
}

std::string format_double(double v)
{
    std::array<char, 32> b{};
    auto [p, ec] = std::to_chars(b.data(), b.data() + b.size(), v);
    return std::string(b.data(), p);
}

void write_offsets_csv(const OffsetSeries& s, std::ostream& out)
{
    out << "run_index,epoch_s,t0_ps,sigma_ps,n_ab,n_ba,fwhm_ab_ps,fwhm_ba_ps\n";
    for (const auto& r : s.samples) {
        out << r.run_index << ',' << r.epoch_s << ',' << format_double(r.t0_ps) << ','
            << format_double(r.sigma_ps) << ',' << format_double(r.n_ab) << ','
            << format_double(r.n_ba) << ',' << format_double(r.fwhm_ab_ps) << ','
            << format_double(r.fwhm_ba_ps) << '\n';
    }
}

OffsetSeries read_offsets_csv(std::istream& in)
{
    expect_header(in, {"run_index", "epoch_s", "t0_ps", "sigma_ps", "n_ab", "n_ba", "fwhm_ab_ps",
                       "fwhm_ba_ps"});
    OffsetSeries s;
    std::string line;
    int ln = 1;
    while (std::getline(in, line)) {
        ++ln;
        if (line.empty() || line == "\r") continue;
        const auto f = split_csv(line);
        if (f.size() != 8) throw FormatError("csv line " + std::to_string(ln) + ": expected 8 fields");
        OffsetSample r;
        r.run_index = parse_field<std::size_t>(f[0], ln, "run_index");
        r.epoch_s = parse_field<std::int64_t>(f[1], ln, "epoch_s");
        r.t0_ps = parse_field<double>(f[2], ln, "t0_ps");
        r.sigma_ps = parse_field<double>(f[3], ln, "sigma_ps");
        r.n_ab = parse_field<double>(f[4], ln, "n_ab");
        r.n_ba = parse_field<double>(f[5], ln, "n_ba");
        r.fwhm_ab_ps = parse_field<double>(f[6], ln, "fwhm_ab_ps");
        r.fwhm_ba_ps = parse_field<double>(f[7], ln, "fwhm_ba_ps");
        if (!s.samples.empty() && r.run_index <= s.samples.back().run_index)
            throw FormatError("csv line " + std::to_string(ln) + ": run_index not increasing");
        s.samples.push_back(r);
    }
    if (s.samples.size() >= 2) {
        const auto& a = s.samples.front();
        const auto& b = s.samples.back();
        s.cycle_period_s = static_cast<double>(b.epoch_s - a.epoch_s) /
                           static_cast<double>(b.run_index - a.run_index);
    }
    for (std::size_t i = 1; i < s.samples.size(); ++i)
        for (auto k = s.samples[i - 1].run_index + 1; k < s.samples[i].run_index; ++k)
            s.failed_runs.push_back(k);
    return s;
}

void write_stability_csv(const StabilityCurve& c, std::ostream& out)
{
    out << "tau_s,value,estimator,n_terms\n";
    for (std::size_t i = 0; i < c.taus.size(); ++i)
        out << format_double(c.taus[i]) << ',' << format_double(c.values[i]) << ','
            << to_string(c.estimator) << ',' << c.n_terms[i] << '\n';
}

StabilityCurve read_stability_csv(std::istream& in)
{
    expect_header(in, {"tau_s", "value", "estimator", "n_terms"});
    StabilityCurve c;
    std::string line;
    int ln = 1;
    bool first = true;
    while (std::getline(in, line)) {
        ++ln;
        if (line.empty() || line == "\r") continue;
        const auto f = split_csv(line);
        if (f.size() != 4) throw FormatError("csv line " + std::to_string(ln) + ": expected 4 fields");
        Estimator e;
        try {
            e = parse_estimator(f[2]);
        } catch (const Error&) {
            throw FormatError("csv line " + std::to_string(ln) + ": bad estimator");
        }
        if (first) c.estimator = e;
        else if (e != c.estimator)
            throw FormatError("csv line " + std::to_string(ln) + ": mixed estimators");
        first = false;
        c.taus.push_back(parse_field<double>(f[0], ln, "tau_s"));
        c.values.push_back(parse_field<double>(f[1], ln, "value"));
        c.n_terms.push_back(parse_field<std::size_t>(f[3], ln, "n_terms"));
        c.ms.push_back(0);
    }
    return c;
}

void write_histogram_csv(const Histogram& h, std::ostream& out)
{
    out << "bin_center_ps,counts\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i)
        out << format_double(h.bin_centers[i]) << ',' << h.counts[i] << '\n';
}

Histogram read_histogram_csv(std::istream& in)
{
    expect_header(in, {"bin_center_ps", "counts"});
    Histogram h;
    std::string line;
    int ln = 1;
    while (std::getline(in, line)) {
        ++ln;
        if (line.empty() || line == "\r") continue;
        const auto f = split_csv(line);
        if (f.size() != 2) throw FormatError("csv line " + std::to_string(ln) + ": expected 2 fields");
        h.bin_centers.push_back(parse_field<double>(f[0], ln, "bin_center_ps"));
        h.counts.push_back(parse_field<std::int64_t>(f[1], ln, "counts"));
    }
    if (h.bin_centers.size() >= 2) h.bin_width = h.bin_centers[1] - h.bin_centers[0];
    return h;
}

CsvKind sniff_csv(const std::string& first_line)
{
    const auto cols = split_csv(first_line);
    if (cols.empty()) return CsvKind::Unknown;
    if (cols.front() == "run_index") return CsvKind::Offsets;
    if (cols.front() == "tau_s") return CsvKind::Stability;
    if (cols.front() == "bin_center_ps") return CsvKind::Histogram;
    return CsvKind::Unknown;
}

void write_file(const std::filesystem::path& path, const std::string& contents)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw Error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace qttlab
