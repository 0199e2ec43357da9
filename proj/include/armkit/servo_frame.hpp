#pragma once

// Servo frame wire format, one frame per line:
//
//   F <seq> <a0> <a1> <a2> <a3> <a4> <a5> G <g>\n
//
// seq is a decimal >= 0, a0..a5 are signed decimal centidegrees, g is 0 (open)
// or 1 (closed). Single spaces, no padding, no leading zeros.

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace armkit {

enum class Gripper : std::uint8_t { open = 0, closed = 1 };

inline constexpr std::string_view to_string(Gripper g) { return g == Gripper::open ? "open" : "closed"; }

struct ServoFrame {
  std::uint64_t seq = 0;
  std::array<std::int32_t, 6> centidegrees{};
  Gripper gripper = Gripper::open;

  bool operator==(const ServoFrame&) const = default;
};

class FrameError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Degrees to centidegrees, rounding half up.
inline std::int32_t to_centidegrees(double deg) { return static_cast<std::int32_t>(std::floor(deg * 100.0 + 0.5)); }

inline std::string format_servo_frame(const ServoFrame& f) {
  std::string out = "F " + std::to_string(f.seq);
  for (auto a : f.centidegrees) {
    out += ' ';
    out += std::to_string(a);
  }
  out += f.gripper == Gripper::closed ? " G 1\n" : " G 0\n";
  return out;
}

inline std::string format_servo_frames(const std::vector<ServoFrame>& frames) {
  std::string out;
  for (const auto& f : frames) out += format_servo_frame(f);
  return out;
}

namespace detail {

class FrameCursor {
 public:
  explicit FrameCursor(std::string_view s) : s_(s) {}

  void expect(std::string_view lit) {
    if (s_.substr(pos_, lit.size()) != lit) fail("expected '" + std::string(lit) + "'");
    pos_ += lit.size();
  }

  template <typename Int>
  Int integer(bool allow_sign) {
    const std::size_t begin = pos_;
    if (allow_sign && pos_ < s_.size() && s_[pos_] == '-') ++pos_;
    const std::size_t digits = pos_;
    while (pos_ < s_.size() && s_[pos_] >= '0' && s_[pos_] <= '9') ++pos_;
    if (pos_ == digits) fail("expected a decimal number");
    if (s_[digits] == '0' && pos_ - digits > 1) fail("leading zeros are not allowed");
    if (s_[begin] == '-' && pos_ - digits == 1 && s_[digits] == '0') fail("negative zero is not allowed");
    Int value{};
    const auto [ptr, ec] = std::from_chars(s_.data() + begin, s_.data() + pos_, value);
    if (ec != std::errc{} || ptr != s_.data() + pos_) fail("number out of range");
    return value;
  }

  bool at_end() const { return pos_ == s_.size(); }

  [[noreturn]] void fail(const std::string& why) const {
    throw FrameError("malformed servo frame at column " + std::to_string(pos_) + ": " + why);
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses exactly one frame; a single trailing '\n' is optional.
inline ServoFrame parse_servo_frame(std::string_view line) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  detail::FrameCursor c(line);
  ServoFrame f;
  c.expect("F ");
  f.seq = c.integer<std::uint64_t>(false);
  for (auto& a : f.centidegrees) {
    c.expect(" ");
    a = c.integer<std::int32_t>(true);
  }
  c.expect(" G ");
  const auto g = c.integer<int>(false);
  if (g != 0 && g != 1) c.fail("gripper bit must be 0 or 1");
  f.gripper = g == 1 ? Gripper::closed : Gripper::open;
  if (!c.at_end()) c.fail("trailing characters");
  return f;
}

/// Parses a newline-separated frame stream. Every line, including the last,
/// must be newline-terminated.
inline std::vector<ServoFrame> parse_servo_frames(std::string_view text) {
  std::vector<ServoFrame> out;
  std::size_t line_no = 1;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    if (nl == std::string_view::npos) {
      throw FrameError("line " + std::to_string(line_no) + ": missing terminating newline");
    }
    try {
      out.push_back(parse_servo_frame(text.substr(0, nl + 1)));
    } catch (const FrameError& e) {
      throw FrameError("line " + std::to_string(line_no) + ": " + e.what());
    }
    text.remove_prefix(nl + 1);
    ++line_no;
  }
  return out;
}

}  // namespace armkit
