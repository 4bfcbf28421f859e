#include <cstring>
#include <fstream>
#include <iterator>
#include <type_traits>

#include <zlib.h>

#include "velomule/error.hpp"
#include "velomule/store.hpp"

namespace velomule {

namespace {

constexpr char kMagic[8] = {'V', 'M', 'S', 'T', 'O', 'R', 'E', '\0'};
// Bump whenever the payload layout or any record type changes.
constexpr std::uint32_t kCacheVersion = 1;

class Writer {
public:
  template <class T>
    requires std::is_arithmetic_v<T>
  void put(T v) {
    const char* p = reinterpret_cast<const char*>(&v);
    buf_.insert(buf_.end(), p, p + sizeof v);
  }
  void put(const std::string& s) {
    put<std::uint64_t>(s.size());
    buf_.insert(buf_.end(), s.begin(), s.end());
  }
  void put(const Timestamp& t) { put<std::int64_t>(t.seconds()); }
  void put(const Date& d) { put<std::int64_t>(d.serial()); }

  const std::vector<char>& bytes() const { return buf_; }

private:
  std::vector<char> buf_;
};

// Any short read flips `ok` and yields zero values from then on.
class Reader {
public:
  explicit Reader(const std::vector<char>& buf) : buf_(buf) {}

  template <class T>
    requires std::is_arithmetic_v<T>
  T get() {
    T v{};
    if (!ok || pos_ + sizeof v > buf_.size()) {
      ok = false;
      return v;
    }
    std::memcpy(&v, buf_.data() + pos_, sizeof v);
    pos_ += sizeof v;
    return v;
  }
  std::string get_string() {
    auto n = get<std::uint64_t>();
    if (!ok || pos_ + n > buf_.size()) {
      ok = false;
      return {};
    }
    std::string s(buf_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  Timestamp get_timestamp() { return Timestamp::from_seconds(get<std::int64_t>()); }
  Date get_date() { return Date::from_serial(get<std::int64_t>()); }

  bool at_end() const { return pos_ == buf_.size(); }
  bool ok = true;

private:
  const std::vector<char>& buf_;
  std::size_t pos_ = 0;
};

std::uint32_t crc_of(const std::vector<char>& data) {
  uLong crc = crc32(0L, Z_NULL, 0);
  const auto* p = reinterpret_cast<const Bytef*>(data.data());
  std::size_t left = data.size();
  while (left > 0) {
    auto chunk = static_cast<uInt>(std::min<std::size_t>(left, 1u << 30));
    crc = crc32(crc, p, chunk);
    p += chunk;
    left -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

void save_store_cache(const HistoryStore& store, const std::filesystem::path& path,
                      std::uint64_t fingerprint) {
  Writer w;
  const BuildSummary& s = store.summary();
  for (std::size_t v : {s.stations, s.status_records, s.trip_records, s.duplicate_stations,
                        s.duplicate_trips, s.dangling_status, s.dangling_trips,
                        s.duration_mismatches})
    w.put<std::uint64_t>(v);

  w.put<std::uint64_t>(store.stations().size());
  for (const auto& st : store.stations()) {
    w.put<std::int32_t>(st.station_id);
    w.put(st.name);
    w.put(st.latitude);
    w.put(st.longitude);
    w.put<std::int32_t>(st.dock_count);
    w.put(st.landmark);
    w.put(st.installation);
  }

  w.put<std::uint64_t>(store.status_count());
  for (const auto& st : store.stations()) {
    const StatusSeries& series = store.status(st.station_id);
    for (std::size_t i = 0; i < series.size(); ++i) {
      w.put<std::int32_t>(st.station_id);
      w.put<std::int32_t>(series.bikes[i]);
      w.put<std::int32_t>(series.docks[i]);
      w.put<std::int64_t>(series.at[i]);
    }
  }

  w.put<std::uint64_t>(store.trips().size());
  for (const auto& t : store.trips()) {
    w.put(t.trip_id);
    w.put(t.duration);
    w.put(t.start_at);
    w.put(t.end_at);
    w.put<std::int32_t>(t.start_station_id);
    w.put<std::int32_t>(t.end_station_id);
    w.put(t.start_terminal);
    w.put(t.end_terminal);
    w.put(t.bike_no);
    w.put(t.zip_code);
    w.put(t.subscription_type);
  }

  Writer header;
  for (char c : kMagic) header.put(c);
  header.put(kCacheVersion);
  header.put(fingerprint);
  header.put<std::uint64_t>(w.bytes().size());
  header.put(crc_of(w.bytes()));

  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(header.bytes().data(), static_cast<std::streamsize>(header.bytes().size()));
    out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
    if (!out) throw Error("cannot write cache " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

std::optional<HistoryStore> load_store_cache(const std::filesystem::path& path,
                                             std::uint64_t fingerprint) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::vector<char> all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  constexpr std::size_t kHeader = sizeof kMagic + 4 + 8 + 8 + 4;
  if (all.size() < kHeader || std::memcmp(all.data(), kMagic, sizeof kMagic) != 0)
    return std::nullopt;
  std::vector<char> head(all.begin(), all.begin() + kHeader);
  Reader h(head);
  for (std::size_t i = 0; i < sizeof kMagic; ++i) h.get<char>();
  if (h.get<std::uint32_t>() != kCacheVersion) return std::nullopt;
  if (h.get<std::uint64_t>() != fingerprint) return std::nullopt;
  auto length = h.get<std::uint64_t>();
  auto crc = h.get<std::uint32_t>();
  if (all.size() - kHeader != length) return std::nullopt;
  std::vector<char> payload(all.begin() + kHeader, all.end());
  all.clear();
  if (crc_of(payload) != crc) return std::nullopt;

  Reader r(payload);
  BuildSummary s;
  for (std::size_t* field :
       {&s.stations, &s.status_records, &s.trip_records, &s.duplicate_stations,
        &s.duplicate_trips, &s.dangling_status, &s.dangling_trips, &s.duration_mismatches})
    *field = r.get<std::uint64_t>();

  std::vector<StationRecord> stations(r.get<std::uint64_t>());
  for (auto& st : stations) {
    if (!r.ok) return std::nullopt;
    st.station_id = r.get<std::int32_t>();
    st.name = r.get_string();
    st.latitude = r.get<double>();
    st.longitude = r.get<double>();
    st.dock_count = r.get<std::int32_t>();
    st.landmark = r.get_string();
    st.installation = r.get_date();
  }

  auto n_status = r.get<std::uint64_t>();
  if (!r.ok || n_status > payload.size()) return std::nullopt;
  std::vector<StatusRecord> status(n_status);
  for (auto& row : status) {
    row.station_id = r.get<std::int32_t>();
    row.bikes_available = r.get<std::int32_t>();
    row.docks_available = r.get<std::int32_t>();
    row.at = r.get_timestamp();
  }

  auto n_trips = r.get<std::uint64_t>();
  if (!r.ok || n_trips > payload.size()) return std::nullopt;
  std::vector<TripRecord> trips(n_trips);
  for (auto& t : trips) {
    t.trip_id = r.get<std::int64_t>();
    t.duration = r.get<std::int64_t>();
    t.start_at = r.get_timestamp();
    t.end_at = r.get_timestamp();
    t.start_station_id = r.get<std::int32_t>();
    t.end_station_id = r.get<std::int32_t>();
    t.start_terminal = r.get_string();
    t.end_terminal = r.get_string();
    t.bike_no = r.get<std::int64_t>();
    t.zip_code = r.get_string();
    t.subscription_type = r.get_string();
  }
  if (!r.ok || !r.at_end()) return std::nullopt;

  HistoryStore store = build_store(std::move(stations), std::move(status), std::move(trips));
  store.summary_ = s;
  return store;
}

}  // namespace velomule
