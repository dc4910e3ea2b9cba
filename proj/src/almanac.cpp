#include "relnav/almanac.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "relnav/error.hpp"

namespace relnav::orbits {

namespace {

// Lowercase letters only: "Time of Applicability(s)" -> "timeofapplicabilitys".
std::string normalize_key(const std::string& raw) {
  std::string out;
  for (char c : raw) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      out.push_back(c);
    }
  }
  return out;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool is_decoration(const std::string& line) {
  // YUMA block banners ("**** Week 145 almanac for PRN-01 ****").
  return !line.empty() && line.front() == '*';
}

struct RawBlock {
  int index = 0;
  std::vector<std::pair<std::string, std::string>> entries;  // normalized key, raw value
};

std::optional<double> parse_number(const std::string& v) {
  // YUMA files use Fortran-style exponents in places; strtod handles E/e/D/d
  // after substitution.
  std::string s = v;
  for (char& c : s) {
    if (c == 'D' || c == 'd') c = 'E';
  }
  char* end = nullptr;
  const double x = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || !std::isfinite(x)) return std::nullopt;
  return x;
}

}  // namespace

void AlmanacRecord::validate() const {
  if (sat_id.value.empty()) throw Error("almanac record without satellite id");
  if (!(sqrt_semimajor > 0.0) || !std::isfinite(sqrt_semimajor)) {
    throw Error("sqrt_semimajor must be positive");
  }
  if (!(eccentricity >= 0.0 && eccentricity < 1.0)) {
    throw Error("eccentricity outside [0, 1)");
  }
  for (double a : {inclination, raan_at_week_epoch, raan_rate, arg_perigee,
                   mean_anomaly_at_epoch, toa}) {
    if (!std::isfinite(a)) throw Error("non-finite almanac angle/time field");
  }
}

AlmanacParseResult parse_almanac(const std::string& text) {
  if (trim(text).empty()) throw Error("empty almanac document");

  std::vector<RawBlock> blocks;
  RawBlock current;
  int block_counter = 0;
  std::istringstream in(text);
  std::string line;
  auto flush = [&] {
    if (!current.entries.empty()) {
      current.index = block_counter++;
      blocks.push_back(std::move(current));
      current = RawBlock{};
    }
  };
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty()) {
      flush();
      continue;
    }
    if (is_decoration(t)) continue;
    const size_t colon = t.find(':');
    if (colon == std::string::npos) continue;  // tolerated stray line
    current.entries.emplace_back(normalize_key(t.substr(0, colon)),
                                 trim(t.substr(colon + 1)));
  }
  flush();

  AlmanacParseResult result;
  for (const RawBlock& b : blocks) {
    AlmanacRecord rec;
    std::string id_value;
    char constellation = 'G';
    bool ok = true;
    std::string err;

    auto need_number = [&](const std::string& value, const char* name) -> double {
      auto x = parse_number(value);
      if (!x) {
        ok = false;
        err = std::string("unparseable value for ") + name;
        return 0.0;
      }
      return *x;
    };

    for (const auto& [key, value] : b.entries) {
      if (key == "id") {
        id_value = value;
      } else if (key == "constellation") {
        if (!value.empty()) constellation = static_cast<char>(std::toupper(static_cast<unsigned char>(value.front())));
      } else if (key == "eccentricity") {
        rec.eccentricity = need_number(value, "eccentricity");
      } else if (key.starts_with("timeofapplicability") || key == "toa") {
        rec.toa = need_number(value, "toa");
      } else if (key.starts_with("orbitalinclination") || key == "inclination") {
        rec.inclination = need_number(value, "inclination");
      } else if (key.starts_with("rateofrightascen") || key == "raanrate") {
        rec.raan_rate = need_number(value, "raan_rate");
      } else if (key.starts_with("sqrta") || key == "sqrtsemimajor") {
        rec.sqrt_semimajor = need_number(value, "sqrt_semimajor");
      } else if (key.starts_with("rightascenatweek") || key == "raanatweekepoch") {
        rec.raan_at_week_epoch = need_number(value, "raan_at_week_epoch");
      } else if (key.starts_with("argumentofperigee") || key == "argperigee") {
        rec.arg_perigee = need_number(value, "arg_perigee");
      } else if (key.starts_with("meananom")) {
        rec.mean_anomaly_at_epoch = need_number(value, "mean_anomaly_at_epoch");
      } else if (key == "week") {
        rec.week = static_cast<int>(need_number(value, "week"));
      }
      // health, af0, af1 and unknown keys are ignored.
      if (!ok) break;
    }

    if (ok) {
      if (id_value.empty()) {
        ok = false;
        err = "block has no satellite id";
      } else if (std::isalpha(static_cast<unsigned char>(id_value.front()))) {
        rec.sat_id.value = id_value;
      } else {
        auto prn = parse_number(id_value);
        if (!prn) {
          ok = false;
          err = "unparseable satellite id";
        } else {
          char buf[8];
          std::snprintf(buf, sizeof buf, "%c%02d", constellation, static_cast<int>(*prn));
          rec.sat_id.value = buf;
        }
      }
    }

    if (ok) {
      try {
        rec.validate();
      } catch (const Error& e) {
        ok = false;
        err = e.what();
      }
    }

    if (ok) {
      result.records.push_back(std::move(rec));
    } else {
      result.diagnostics.push_back({b.index, err});
    }
  }
  return result;
}

AlmanacParseResult parse_almanac_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open almanac file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_almanac(ss.str());
}

}  // namespace relnav::orbits
