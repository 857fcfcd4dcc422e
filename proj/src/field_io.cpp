#include "nashlab/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace nashlab {

namespace {

constexpr char kMagic[8] = {'N', 'L', 'F', 'L', 'D', '0', '0', '1'};

static_assert(std::endian::native == std::endian::little,
              "field containers are written on little-endian hosts");

}  // namespace

void save_field(const Field& field, const std::string& path, const std::string& name) {
    if (field.values.size() != field.times.size() * field.grid.nodes())
        throw IoError("save_field: value buffer does not match times x nodes");
    nlohmann::json header;
    header["axes"] = field.grid.axes;
    header["n"] = field.grid.n;
    header["half_width"] = field.grid.half_width;
    header["times"] = field.times;
    header["name"] = name;
    const std::string htext = header.dump();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("save_field: cannot open " + path);
    out.write(kMagic, sizeof(kMagic));
    const std::uint64_t hlen = htext.size();
    out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    out.write(htext.data(), static_cast<std::streamsize>(htext.size()));
    out.write(reinterpret_cast<const char*>(field.values.data()),
              static_cast<std::streamsize>(field.values.size() * sizeof(double)));
    if (!out) throw IoError("save_field: write failed for " + path);
}

Field load_field(const std::string& path, std::string* name_out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("load_field: cannot open " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw IoError("load_field: bad magic in " + path);
    std::uint64_t hlen = 0;
    in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
    if (!in || hlen == 0 || hlen > (1u << 20)) throw IoError("load_field: bad header length in " + path);
    std::string htext(hlen, '\0');
    in.read(htext.data(), static_cast<std::streamsize>(hlen));
    if (!in) throw IoError("load_field: truncated header in " + path);

    nlohmann::json header = nlohmann::json::parse(htext, nullptr, false);
    if (header.is_discarded()) throw IoError("load_field: header is not valid JSON in " + path);
    TensorGrid grid = make_grid(header.at("axes").get<int>(), header.at("n").get<int>(),
                                header.at("half_width").get<double>());
    std::vector<double> times = header.at("times").get<std::vector<double>>();
    if (name_out && header.contains("name")) *name_out = header["name"].get<std::string>();

    Field f = make_field(grid, std::move(times));
    in.read(reinterpret_cast<char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (!in || in.gcount() != static_cast<std::streamsize>(f.values.size() * sizeof(double)))
        throw IoError("load_field: payload size mismatch in " + path);
    char extra;
    if (in.read(&extra, 1)) throw IoError("load_field: trailing bytes in " + path);
    if (!all_finite(f.values)) throw IoError("load_field: non-finite payload in " + path);
    return f;
}

}  // namespace nashlab
