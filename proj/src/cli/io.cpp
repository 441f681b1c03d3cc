#include "xvann/cli/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "xvann/errors.hpp"

namespace xvann::cli {

namespace fs = std::filesystem;
static_assert(std::endian::native == std::endian::little, "binary dumps assume a little-endian host");

namespace {

constexpr char kTrailer[] = "XVAHASH:";
constexpr std::size_t kTrailerSize = 8 + 16;

template <class T>
void put(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::ifstream& in, const fs::path& file) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw FormatError(file.string() + ": truncated header");
    return v;
}

std::string slurp(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw OrchestrationError("missing artifact " + file.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_array(const fs::path& file, const char (&magic)[9], const std::vector<std::uint64_t>& dims,
                 const std::vector<double>& data, const std::string& hash) {
    std::uint64_t n = 1;
    for (auto d : dims) n *= d;
    if (n != data.size()) throw DimensionError(file.string() + ": data does not match dims");
    if (hash.size() != 16) throw FormatError("config hash must have 16 hex digits");
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + file.string());
    out.write(magic, 8);
    put(out, kFormatVersion);
    for (auto d : dims) put(out, d);
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(double)));
    out.write(kTrailer, 8);
    out.write(hash.data(), 16);
    if (!out) throw FormatError("write failed for " + file.string());
}

Array read_array(const fs::path& file, const char (&magic)[9], std::size_t rank) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw OrchestrationError("missing artifact " + file.string());
    char m[8];
    if (!in.read(m, 8) || std::memcmp(m, magic, 8) != 0) throw FormatError(file.string() + ": bad magic");
    if (get<std::uint32_t>(in, file) != kFormatVersion) throw FormatError(file.string() + ": unsupported version");
    Array a;
    std::uint64_t n = 1;
    for (std::size_t r = 0; r < rank; ++r) {
        a.dims.push_back(get<std::uint64_t>(in, file));
        n *= a.dims.back();
    }
    const auto expected = 12 + 8 * rank + n * sizeof(double) + kTrailerSize;
    if (fs::file_size(file) != expected) throw FormatError(file.string() + ": size does not match its header");
    a.data.resize(n);
    in.read(reinterpret_cast<char*>(a.data.data()), static_cast<std::streamsize>(n * sizeof(double)));
    char t[kTrailerSize];
    if (!in.read(t, kTrailerSize) || std::memcmp(t, kTrailer, 8) != 0)
        throw FormatError(file.string() + ": missing hash trailer");
    a.hash.assign(t + 8, 16);
    return a;
}

namespace {

Array read_checked(const fs::path& file, const char (&magic)[9], std::size_t rank, const std::string& hash) {
    auto a = read_array(file, magic, rank);
    if (a.hash != hash)
        throw OrchestrationError(file.string() + " was written by config " + a.hash + ", not " + hash);
    return a;
}

}  // namespace

void write_cube(const fs::path& dir, const std::string& stem, const market::PathCube& cube, const std::string& hash) {
    const std::uint64_t f = cube.factors(), p = cube.paths(), n = cube.dates();
    write_array(dir / (stem + "_x.bin"), "XVAPATHS", {f, p, n}, cube.factor_data(), hash);
    write_array(dir / (stem + "_dw.bin"), "XVAPATHS", {f, p, n - 1}, cube.increment_data(), hash);
    write_array(dir / (stem + "_hedge.bin"), "XVAPATHS", {f, p, n - 1}, cube.hedge_data(), hash);
    write_array(dir / (stem + "_numeraire.bin"), "XVAPATHS", {1, p, n}, cube.numeraire_data(), hash);
}

market::PathCube read_cube(const fs::path& dir, const std::string& stem, const std::string& hash) {
    auto x = read_checked(dir / (stem + "_x.bin"), "XVAPATHS", 3, hash);
    market::PathCube cube(x.dims[0], x.dims[1], x.dims[2]);
    auto dw = read_checked(dir / (stem + "_dw.bin"), "XVAPATHS", 3, hash);
    auto hg = read_checked(dir / (stem + "_hedge.bin"), "XVAPATHS", 3, hash);
    auto b = read_checked(dir / (stem + "_numeraire.bin"), "XVAPATHS", 3, hash);
    const std::vector<std::uint64_t> steps{x.dims[0], x.dims[1], x.dims[2] - 1};
    if (dw.dims != steps || hg.dims != steps || b.dims != std::vector<std::uint64_t>{1, x.dims[1], x.dims[2]})
        throw FormatError("cube " + stem + ": component dimensions disagree");
    cube.factor_data() = std::move(x.data);
    cube.increment_data() = std::move(dw.data);
    cube.hedge_data() = std::move(hg.data);
    cube.numeraire_data() = std::move(b.data);
    return cube;
}

void write_text(const fs::path& file, const std::string& body, const std::string& hash) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + file.string());
    out << "# config_hash=" << hash << "\n" << body;
    if (!out) throw FormatError("write failed for " + file.string());
}

std::string read_text(const fs::path& file, const std::string& hash) {
    const std::string s = slurp(file);
    const std::string head = "# config_hash=" + hash + "\n";
    if (s.compare(0, head.size(), head) != 0)
        throw OrchestrationError(file.string() + " was written by another config (expected " + hash + ")");
    return s.substr(head.size());
}

std::string artifact_hash(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) return "";
    const auto size = fs::file_size(file);
    char head[14];
    if (in.read(head, 14) && std::memcmp(head, "# config_hash=", 14) == 0) {
        std::string h(16, '\0');
        in.read(h.data(), 16);
        return in ? h : "";
    }
    if (size < kTrailerSize) return "";
    in.clear();
    in.seekg(static_cast<std::streamoff>(size - kTrailerSize));
    char t[kTrailerSize];
    if (!in.read(t, kTrailerSize) || std::memcmp(t, kTrailer, 8) != 0) return "";
    return std::string(t + 8, 16);
}

void check_directory(const fs::path& dir, const std::string& hash) {
    if (!fs::exists(dir)) return;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const auto h = artifact_hash(e.path());
        if (!h.empty() && h != hash)
            throw OrchestrationError("output directory " + dir.string() + " holds " + e.path().filename().string() +
                                     " from config " + h + "; refusing to mix with " + hash);
    }
}

void write_checkpoint(const fs::path& dir, const bsde::TrainableState& st, const std::string& hash) {
    fs::create_directories(dir);
    const auto& theta = st.theta();
    const std::size_t d = st.factors();
    write_array(dir / "head.bin", "XVANNPRM", {1 + d}, {theta.begin(), theta.begin() + 1 + static_cast<long>(d)}, hash);
    const auto& spec = st.net().spec();
    std::vector<std::uint64_t> widths{spec.input};
    for (auto h : spec.hidden) widths.push_back(h);
    widths.push_back(spec.output);
    std::ostringstream man;
    man << "factors=" << d << "\nsteps=" << st.steps() << "\nextra_width=" << st.config().extra_width
        << "\nactivation=" << neural::to_string(st.config().activation) << "\nbias=" << st.config().bias
        << "\nshare_weights=" << st.config().share_weights << "\ntime_scale=" << fmt(st.time_scale())
        << "\nnetworks=" << st.network_count() << "\nlayer_widths=";
    for (std::size_t i = 0; i < widths.size(); ++i) man << (i ? "," : "") << widths[i];
    man << "\nfiles=head.bin,inputs.bin";
    for (std::size_t k = 0; k < st.network_count(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "net_%03zu.bin", k);
        const auto off = 1 + d + k * st.net().size();
        write_array(dir / name, "XVANNPRM", {st.net().size()},
                    {theta.begin() + static_cast<long>(off), theta.begin() + static_cast<long>(off + st.net().size())},
                    hash);
        man << "," << name;
    }
    man << "\n";
    std::vector<double> inputs(st.input_mean());
    inputs.insert(inputs.end(), st.input_scale().begin(), st.input_scale().end());
    write_array(dir / "inputs.bin", "XVANNPRM", {2, st.steps() + 1, d}, inputs, hash);
    write_text(dir / "manifest.txt", man.str(), hash);
}

bsde::TrainableState read_checkpoint(const fs::path& dir, const std::string& hash) {
    std::map<std::string, std::string> kv;
    std::istringstream is(read_text(dir / "manifest.txt", hash));
    std::string line;
    while (std::getline(is, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    auto need = [&](const std::string& k) -> const std::string& {
        auto it = kv.find(k);
        if (it == kv.end()) throw FormatError("checkpoint manifest lacks " + k);
        return it->second;
    };
    bsde::NetConfig nc;
    nc.extra_width = std::stoul(need("extra_width"));
    nc.activation = neural::parse_activation(need("activation"));
    nc.bias = need("bias") == "1";
    nc.share_weights = need("share_weights") == "1";
    const std::size_t d = std::stoul(need("factors")), steps = std::stoul(need("steps"));
    bsde::TrainableState st(d, steps, nc);
    st.set_time_scale(std::stod(need("time_scale")));

    auto head = read_checked(dir / "head.bin", "XVANNPRM", 1, hash);
    if (head.dims[0] != 1 + d) throw FormatError("checkpoint head has the wrong size");
    auto& theta = st.theta();
    std::copy(head.data.begin(), head.data.end(), theta.begin());
    for (std::size_t k = 0; k < st.network_count(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "net_%03zu.bin", k);
        auto a = read_checked(dir / name, "XVANNPRM", 1, hash);
        if (a.data.size() != st.net().size()) throw FormatError(std::string(name) + ": network size mismatch");
        std::copy(a.data.begin(), a.data.end(), theta.begin() + static_cast<long>(1 + d + k * st.net().size()));
    }
    auto in = read_checked(dir / "inputs.bin", "XVANNPRM", 3, hash);
    const std::size_t m = (steps + 1) * d;
    if (in.data.size() != 2 * m) throw FormatError("inputs.bin: size mismatch");
    st.input_mean().assign(in.data.begin(), in.data.begin() + static_cast<long>(m));
    st.input_scale().assign(in.data.begin() + static_cast<long>(m), in.data.end());
    return st;
}

}  // namespace xvann::cli
