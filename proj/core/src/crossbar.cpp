#include <algorithm>
#include <cmath>
#include <string>

#include "xpoint/crossbar.hpp"
#include "xpoint/errors.hpp"

namespace xpoint {

CrossbarArray CrossbarArray::balanced(std::size_t m_words, std::size_t n_bits,
                                      const MtjParams& params,
                                      const TransistorModel& word_transistor,
                                      double line_resistance) {
  if (m_words == 0 || n_bits == 0) throw ParameterError("array: m_words and n_bits must be >= 1");
  if (m_words % 2 != 0) {
    throw ParameterError("array.m_words must be even for the odd/even reference scheme (got " +
                         std::to_string(m_words) + ")");
  }
  validate(params);
  validate(word_transistor);

  CrossbarArray a;
  a.layout_ = Layout::Balanced;
  a.m_words_ = m_words;
  a.n_bits_ = n_bits;
  a.word_lines_ = m_words + 2;
  a.bit_lines_ = 2 * n_bits;
  a.params_ = params;
  a.set_line_resistance(line_resistance);
  a.cells_.assign(a.word_lines_ * a.bit_lines_, std::nullopt);
  a.drivers_.assign(a.word_lines_, WordDrivers{word_transistor, word_transistor});

  for (std::size_t w = 0; w < m_words; ++w)
    for (std::size_t b = 0; b < n_bits; ++b)
      a.cell(w, a.data_bit_line(w, b)) = MtjDevice{params, MtjState::P, 0.0};

  const MtjParams ref = reference_params(params);
  for (std::size_t b = 0; b < n_bits; ++b) {
    a.cell(m_words, 2 * b + 1) = MtjDevice{ref, MtjState::P, 0.0};
    a.cell(m_words + 1, 2 * b) = MtjDevice{ref, MtjState::P, 0.0};
  }
  return a;
}

CrossbarArray CrossbarArray::plain(std::size_t m_words, std::size_t n_bits,
                                   const MtjParams& params,
                                   std::optional<TransistorModel> word_transistor,
                                   double line_resistance) {
  if (m_words == 0 || n_bits == 0) throw ParameterError("array: m_words and n_bits must be >= 1");
  validate(params);
  if (word_transistor) validate(*word_transistor);

  CrossbarArray a;
  a.layout_ = Layout::Plain;
  a.m_words_ = m_words;
  a.n_bits_ = n_bits;
  a.word_lines_ = m_words;
  a.bit_lines_ = n_bits;
  a.params_ = params;
  a.set_line_resistance(line_resistance);
  a.cells_.assign(a.word_lines_ * a.bit_lines_, MtjDevice{params, MtjState::P, 0.0});
  if (word_transistor) {
    a.drivers_.assign(a.word_lines_, WordDrivers{*word_transistor, *word_transistor});
  } else {
    a.drivers_.assign(a.word_lines_, std::nullopt);
  }
  return a;
}

void CrossbarArray::set_line_resistance(double r) {
  if (!(r >= 0.0) || !std::isfinite(r)) {
    throw ParameterError("array.line_resistance must be >= 0 (got " + std::to_string(r) + ")");
  }
  line_resistance_ = r;
}

std::optional<MtjDevice>& CrossbarArray::cell(std::size_t word_line, std::size_t bit_line) {
  return cells_.at(word_line * bit_lines_ + bit_line);
}

const std::optional<MtjDevice>& CrossbarArray::cell(std::size_t word_line,
                                                    std::size_t bit_line) const {
  return cells_.at(word_line * bit_lines_ + bit_line);
}

void CrossbarArray::check_word(std::size_t word) const {
  if (word >= m_words_) {
    throw ParameterError("word address " + std::to_string(word) + " out of range (m_words=" +
                         std::to_string(m_words_) + ")");
  }
}

void CrossbarArray::check_bit(std::size_t bit) const {
  if (bit >= n_bits_) {
    throw ParameterError("bit index " + std::to_string(bit) + " out of range (n_bits=" +
                         std::to_string(n_bits_) + ")");
  }
}

std::size_t CrossbarArray::data_bit_line(std::size_t word, std::size_t bit) const {
  check_word(word);
  check_bit(bit);
  return layout_ == Layout::Balanced ? 2 * bit + word % 2 : bit;
}

MtjDevice& CrossbarArray::data(std::size_t word, std::size_t bit) {
  auto& c = cell(word, data_bit_line(word, bit));
  if (!c) {
    throw ParameterError("no device at word " + std::to_string(word) + ", bit " +
                         std::to_string(bit));
  }
  return *c;
}

const MtjDevice& CrossbarArray::data(std::size_t word, std::size_t bit) const {
  const auto& c = cell(word, data_bit_line(word, bit));
  if (!c) {
    throw ParameterError("no device at word " + std::to_string(word) + ", bit " +
                         std::to_string(bit));
  }
  return *c;
}

std::size_t CrossbarArray::reference_word_line(std::size_t word) const {
  check_word(word);
  if (layout_ != Layout::Balanced) throw ParameterError("plain layout has no reference words");
  return word % 2 == 0 ? m_words_ : m_words_ + 1;
}

std::size_t CrossbarArray::reference_bit_line(std::size_t word, std::size_t bit) const {
  check_word(word);
  check_bit(bit);
  if (layout_ != Layout::Balanced) throw ParameterError("plain layout has no reference words");
  return 2 * bit + (1 - word % 2);
}

std::vector<std::size_t> CrossbarArray::same_parity_words(std::size_t word) const {
  check_word(word);
  std::vector<std::size_t> out;
  for (std::size_t w = 0; w < m_words_; ++w) {
    if (w == word) continue;
    if (layout_ == Layout::Balanced && w % 2 != word % 2) continue;
    out.push_back(w);
  }
  return out;
}

void CrossbarArray::set_drivers(std::size_t word_line, std::optional<WordDrivers> d) {
  if (d) {
    validate(d->nmos);
    validate(d->pmos);
  }
  drivers_.at(word_line) = std::move(d);
}

std::vector<bool> CrossbarArray::read_word_state(std::size_t word) const {
  std::vector<bool> bits(n_bits_);
  for (std::size_t b = 0; b < n_bits_; ++b) bits[b] = logic_value(data(word, b).state);
  return bits;
}

void CrossbarArray::set_word_state(std::size_t word, const std::vector<bool>& bits) {
  if (bits.size() != n_bits_) {
    throw ParameterError("data length " + std::to_string(bits.size()) + " != n_bits " +
                         std::to_string(n_bits_));
  }
  for (std::size_t b = 0; b < n_bits_; ++b) {
    auto& d = data(word, b);
    d.state = state_for(bits[b]);
    d.progress = 0.0;
  }
}

void CrossbarArray::set_all(MtjState s) {
  for (std::size_t w = 0; w < m_words_; ++w)
    for (std::size_t b = 0; b < n_bits_; ++b) {
      data(w, b).state = s;
      data(w, b).progress = 0.0;
    }
}

std::size_t CrossbarArray::device_count() const {
  return static_cast<std::size_t>(
      std::count_if(cells_.begin(), cells_.end(), [](const auto& c) { return c.has_value(); }));
}

std::string CrossbarArray::word_line_label(std::size_t word_line) const {
  if (layout_ == Layout::Balanced && word_line >= m_words_) {
    return word_line == m_words_ ? "WLref_even" : "WLref_odd";
  }
  return "WL" + std::to_string(word_line);
}

std::string CrossbarArray::bit_line_label(std::size_t bit_line) const {
  if (layout_ == Layout::Balanced) {
    return "BL" + std::to_string(bit_line / 2) + (bit_line % 2 == 0 ? "a" : "b");
  }
  return "BL" + std::to_string(bit_line);
}

BiasCondition BiasCondition::all_floating(const CrossbarArray& array) {
  BiasCondition b;
  b.word_lines.assign(array.word_lines(), LineBias::floating());
  b.bit_lines.assign(array.bit_lines(), LineBias::floating());
  b.gates.assign(array.word_lines(), GateState{});
  return b;
}

void validate(const BiasCondition& bias, const CrossbarArray& array) {
  if (bias.word_lines.size() != array.word_lines() || bias.bit_lines.size() != array.bit_lines() ||
      bias.gates.size() != array.word_lines()) {
    throw ParameterError("bias condition does not match array dimensions");
  }
  const auto non_floating = [](const LineBias& l) { return !l.is_floating(); };
  const bool any_line = std::any_of(bias.word_lines.begin(), bias.word_lines.end(), non_floating) ||
                        std::any_of(bias.bit_lines.begin(), bias.bit_lines.end(), non_floating);
  bool any_transistor = false;
  for (std::size_t w = 0; w < array.word_lines(); ++w) any_transistor |= array.drivers(w).has_value();
  if (!any_line && !any_transistor) {
    throw SingularNetworkError("every line is floating and no word transistor ties the array to a rail",
                               {});
  }
  for (std::size_t w = 0; w < array.word_lines(); ++w) {
    const auto& g = bias.gates[w];
    if (g.nmos == Gate::On && g.pmos == Gate::On) {
      throw ParameterError("gates of " + array.word_line_label(w) +
                           ": NMOS and PMOS cannot both be on");
    }
    if ((g.nmos == Gate::On || g.pmos == Gate::On) && !array.drivers(w)) {
      throw ParameterError(array.word_line_label(w) + " has no selection transistors to turn on");
    }
  }
}

}  // namespace xpoint
