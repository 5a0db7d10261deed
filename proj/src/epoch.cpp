#include "wafx/epoch.hpp"

#include <charconv>
#include <cstdio>

#include "wafx/error.hpp"

namespace wafx {

using namespace std::chrono;

std::optional<UtcTime> decode_epoch(std::int64_t value, EpochUnit unit) {
  if (value < 0) return std::nullopt;
  return unit == EpochUnit::Seconds ? UtcTime{seconds{value}} : UtcTime{milliseconds{value}};
}

namespace {

std::optional<int> read_int(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<UtcOffset> try_parse_offset(std::string_view text) {
  if (text == "Z" || text == "UTC" || text == "utc") return UtcOffset{0};
  if (text.size() < 3 || (text[0] != '+' && text[0] != '-')) return std::nullopt;
  const int sign = text[0] == '-' ? -1 : 1;
  std::string_view rest = text.substr(1);
  std::string_view hh, mm = "0";
  if (auto colon = rest.find(':'); colon != std::string_view::npos) {
    hh = rest.substr(0, colon);
    mm = rest.substr(colon + 1);
  } else if (rest.size() == 4) {
    hh = rest.substr(0, 2);
    mm = rest.substr(2);
  } else {
    hh = rest;
  }
  auto h = read_int(hh);
  auto m = read_int(mm);
  if (!h || !m || *h > 18 || *m > 59) return std::nullopt;
  return UtcOffset{sign * (*h * 60 + *m)};
}

}  // namespace

UtcOffset UtcOffset::parse(std::string_view text) {
  auto off = try_parse_offset(text);
  if (!off) throw std::invalid_argument("bad UTC offset '" + std::string(text) + "'");
  return *off;
}

std::string UtcOffset::to_string() const {
  char buf[16];
  const int a = minutes < 0 ? -minutes : minutes;
  std::snprintf(buf, sizeof buf, "%c%02d:%02d", minutes < 0 ? '-' : '+', a / 60, a % 60);
  return buf;
}

std::string render_time(UtcTime t, UtcOffset offset) {
  const auto local = t + minutes{offset.minutes};
  const auto day = floor<days>(local);
  const year_month_day ymd{day};
  const hh_mm_ss<milliseconds> tod{local - day};
  char buf[48];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02d:%02d:%02d.%03d%s", int(ymd.year()), unsigned(ymd.month()),
                unsigned(ymd.day()), int(tod.hours().count()), int(tod.minutes().count()),
                int(tod.seconds().count()), int(tod.subseconds().count()), offset.to_string().c_str());
  return buf;
}

std::string render_time(EpochMillis t, UtcOffset offset) { return render_time(UtcTime{milliseconds{t.value}}, offset); }

std::string iso_utc(EpochMillis t) {
  std::string s = render_time(t, {});
  s[10] = 'T';
  return s.substr(0, 23) + "Z";
}

std::string utc_date(EpochMillis t) { return render_time(t, {}).substr(0, 10); }

std::optional<EpochMillis> parse_datetime(std::string_view text, UtcOffset assumed) {
  // YYYY-MM-DD?HH:MM:SS
  if (text.size() < 19 || text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
      text[13] != ':' || text[16] != ':')
    return std::nullopt;
  auto y = read_int(text.substr(0, 4));
  auto mo = read_int(text.substr(5, 2));
  auto d = read_int(text.substr(8, 2));
  auto h = read_int(text.substr(11, 2));
  auto mi = read_int(text.substr(14, 2));
  auto s = read_int(text.substr(17, 2));
  if (!y || !mo || !d || !h || !mi || !s) return std::nullopt;
  std::string_view rest = text.substr(19);
  int millis = 0;
  if (!rest.empty() && rest[0] == '.') {
    std::size_t n = 1;
    while (n < rest.size() && rest[n] >= '0' && rest[n] <= '9') ++n;
    std::string_view frac = rest.substr(1, n - 1);
    if (frac.empty() || frac.size() > 3) return std::nullopt;
    millis = *read_int(frac);
    for (std::size_t i = frac.size(); i < 3; ++i) millis *= 10;
    rest.remove_prefix(n);
  }
  UtcOffset offset = assumed;
  if (!rest.empty()) {
    auto parsed = try_parse_offset(rest);
    if (!parsed) return std::nullopt;
    offset = *parsed;
  }
  const year_month_day ymd{year{*y}, month{unsigned(*mo)}, day{unsigned(*d)}};
  if (!ymd.ok() || *h > 23 || *mi > 59 || *s > 60) return std::nullopt;
  const auto tp = sys_days{ymd} + hours{*h} + minutes{*mi} + seconds{*s} + milliseconds{millis} -
                  minutes{offset.minutes};
  return EpochMillis{duration_cast<milliseconds>(tp.time_since_epoch()).count()};
}

}  // namespace wafx
