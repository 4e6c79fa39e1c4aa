#include "metato/dataset.hpp"

#include "metato/binary_io.hpp"

#include <nlohmann/json.hpp>

namespace metato::taskgen {

namespace {
constexpr std::string_view kMagic = "MNTOTASK";
constexpr std::uint32_t kVersion = 1;
}  // namespace

std::string encode_dataset(const Dataset& ds) {
  ByteWriter w;
  const auto& m = ds.manifest;
  w.bytes(kMagic);
  w.u32(kVersion);
  w.u8(static_cast<std::uint8_t>(m.regime));
  w.u64(m.seed);
  w.u32(static_cast<std::uint32_t>(m.disc.nelx));
  w.u32(static_cast<std::uint32_t>(m.disc.nely));
  w.u64(ds.tasks.size());
  w.u64(m.candidates);
  for (auto r : m.rejections) w.u64(r);
  for (const auto& t : ds.tasks) {
    if (!(t.disc == m.disc)) throw std::invalid_argument("task mesh differs from dataset mesh");
    w.u64(t.id);
    w.f64(t.vstar);
    w.f64(t.c_ref);
    w.u32(static_cast<std::uint32_t>(t.bc.fixed_dofs.size()));
    for (int d : t.bc.fixed_dofs) w.u32(static_cast<std::uint32_t>(d));
    w.u32(static_cast<std::uint32_t>(t.bc.loads.size()));
    for (const auto& [dof, value] : t.bc.loads) {
      w.u32(static_cast<std::uint32_t>(dof));
      w.f64(value);
    }
    w.u64(static_cast<std::uint64_t>(t.energy.size()));
    w.f64s({t.energy.data(), static_cast<std::size_t>(t.energy.size())});
  }
  w.seal();
  return w.data();
}

Dataset decode_dataset(std::string_view bytes) {
  ByteReader r(verify_sealed(bytes));
  if (r.bytes(kMagic.size()) != kMagic) throw FormatError("not a task dataset");
  if (const auto v = r.u32(); v != kVersion) throw FormatError("unsupported dataset version " + std::to_string(v));
  Dataset ds;
  auto& m = ds.manifest;
  m.version = kVersion;
  const auto regime = r.u8();
  if (regime > 4) throw FormatError("unknown regime tag");
  m.regime = static_cast<Regime>(regime);
  m.seed = r.u64();
  m.disc.nelx = static_cast<int>(r.u32());
  m.disc.nely = static_cast<int>(r.u32());
  m.count = r.u64();
  m.candidates = r.u64();
  for (auto& c : m.rejections) c = r.u64();
  const int nel = m.disc.num_elements();
  ds.tasks.reserve(m.count);
  for (std::uint64_t i = 0; i < m.count; ++i) {
    Task t;
    t.regime = m.regime;
    t.disc = m.disc;
    t.id = r.u64();
    t.vstar = r.f64();
    t.c_ref = r.f64();
    const auto nfixed = r.u32();
    t.bc.fixed_dofs.resize(nfixed);
    for (auto& d : t.bc.fixed_dofs) d = static_cast<int>(r.u32());
    const auto nloads = r.u32();
    t.bc.loads.resize(nloads);
    for (auto& [dof, value] : t.bc.loads) {
      dof = static_cast<int>(r.u32());
      value = r.f64();
    }
    const auto ne = r.u64();
    if (ne != static_cast<std::uint64_t>(nel)) throw FormatError("energy length does not match mesh");
    t.energy.resize(nel);
    for (int e = 0; e < nel; ++e) t.energy[e] = r.f64();
    ds.tasks.push_back(std::move(t));
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes in dataset");
  return ds;
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds) { write_file(path, encode_dataset(ds)); }

Dataset load_dataset(const std::filesystem::path& path) { return decode_dataset(read_file(path)); }

std::string dataset_to_json(const Dataset& ds) {
  nlohmann::ordered_json j;
  const auto& m = ds.manifest;
  j["format_version"] = m.version;
  j["regime"] = to_string(m.regime);
  j["seed"] = m.seed;
  j["nelx"] = m.disc.nelx;
  j["nely"] = m.disc.nely;
  j["count"] = ds.tasks.size();
  j["candidates"] = m.candidates;
  auto& rej = j["rejections"];
  for (std::size_t k = 0; k < kRejectionKinds; ++k) rej[to_string(static_cast<Rejection>(k))] = m.rejections[k];
  auto& tasks = j["tasks"] = nlohmann::ordered_json::array();
  for (const auto& t : ds.tasks) {
    nlohmann::ordered_json jt;
    jt["id"] = t.id;
    jt["vstar"] = t.vstar;
    jt["c_ref"] = t.c_ref;
    jt["fixed_dofs"] = t.bc.fixed_dofs;
    auto& loads = jt["loads"] = nlohmann::ordered_json::array();
    for (const auto& [dof, value] : t.bc.loads) loads.push_back({dof, value});
    jt["energy"] = std::vector<double>(t.energy.data(), t.energy.data() + t.energy.size());
    tasks.push_back(std::move(jt));
  }
  return j.dump(1);
}

Dataset dataset_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  Dataset ds;
  auto& m = ds.manifest;
  m.version = j.at("format_version").get<std::uint32_t>();
  m.regime = parse_regime(j.at("regime").get<std::string>());
  m.seed = j.at("seed").get<std::uint64_t>();
  m.disc.nelx = j.at("nelx").get<int>();
  m.disc.nely = j.at("nely").get<int>();
  m.count = j.at("count").get<std::uint64_t>();
  m.candidates = j.at("candidates").get<std::uint64_t>();
  for (std::size_t k = 0; k < kRejectionKinds; ++k)
    m.rejections[k] = j.at("rejections").at(to_string(static_cast<Rejection>(k))).get<std::uint64_t>();
  for (const auto& jt : j.at("tasks")) {
    Task t;
    t.regime = m.regime;
    t.disc = m.disc;
    t.id = jt.at("id").get<std::uint64_t>();
    t.vstar = jt.at("vstar").get<double>();
    t.c_ref = jt.at("c_ref").get<double>();
    t.bc.fixed_dofs = jt.at("fixed_dofs").get<std::vector<int>>();
    for (const auto& l : jt.at("loads")) t.bc.loads.emplace_back(l.at(0).get<int>(), l.at(1).get<double>());
    const auto e = jt.at("energy").get<std::vector<double>>();
    t.energy = Eigen::Map<const Eigen::VectorXd>(e.data(), static_cast<Eigen::Index>(e.size()));
    ds.tasks.push_back(std::move(t));
  }
  return ds;
}

}  // namespace metato::taskgen
