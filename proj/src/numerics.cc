#include <paramforge/numerics.hh>

#include <fstream>
#include <sstream>

using std::optional;
using std::size_t;
using std::string;
using std::strong_ordering;
using std::vector;

using nlohmann::json;

namespace paramforge
{
    namespace
    {
        // Shifts at or below this are folded into a plain exponent.
        constexpr unsigned fold_shift = 4096;

        // Two non-plain exponents whose shifts differ by more than this are not
        // combined into a single coefficient.
        constexpr unsigned max_shift_gap = 1u << 20;

        auto sign_of(const BigInt & x) -> strong_ordering
        {
            return x.sign() < 0 ? strong_ordering::less : x.sign() > 0 ? strong_ordering::greater : strong_ordering::equal;
        }

        auto abs_bits(const BigInt & x) -> size_t
        {
            return bit_length(x < 0 ? BigInt(-x) : x);
        }

        auto small_shift(const BigInt & s) -> unsigned
        {
            if (s > max_shift_gap)
                throw CapacityError("shift outside the combinable window");
            return s.convert_to<unsigned>();
        }

        // Boost reads a leading 0 as an octal prefix, so strip it here.
        auto parse_decimal(const string & digits) -> BigInt
        {
            auto first = digits.find_first_not_of('0');
            return first == string::npos ? BigInt(0) : BigInt(digits.substr(first));
        }

        auto parse_decimal_rational(const string & text) -> Rational
        {
            string s = text;
            bool negative = false;
            if (! s.empty() && (s[0] == '-' || s[0] == '+')) {
                negative = s[0] == '-';
                s = s.substr(1);
            }
            auto slash = s.find('/');
            if (slash != string::npos) {
                auto num_text = s.substr(0, slash), den_text = s.substr(slash + 1);
                if (num_text.empty() || den_text.empty() || (num_text + den_text).find_first_not_of("0123456789") != string::npos)
                    throw InvalidQuery("not a fraction: '" + text + "'");
                BigInt num = parse_decimal(num_text), den = parse_decimal(den_text);
                if (den == 0)
                    throw InvalidQuery("zero denominator in '" + text + "'");
                Rational r(num, den);
                return negative ? Rational(-r) : r;
            }
            auto dot = s.find('.');
            string whole = s.substr(0, dot), frac = dot == string::npos ? "" : s.substr(dot + 1);
            if ((whole + frac).empty() || (whole + frac).find_first_not_of("0123456789") != string::npos)
                throw InvalidQuery("not a decimal number: '" + text + "'");
            BigInt num = parse_decimal(whole + frac);
            BigInt den = 1;
            for (size_t k = 0 ; k < frac.size() ; ++k)
                den *= 10;
            Rational r(num, den);
            return negative ? Rational(-r) : r;
        }
    }

    auto three_way(const BigInt & a, const BigInt & b) -> strong_ordering
    {
        int c = a.compare(b);
        return c < 0 ? strong_ordering::less : c > 0 ? strong_ordering::greater : strong_ordering::equal;
    }

    auto bit_length(const BigInt & x) -> size_t
    {
        if (x <= 0)
            return 0;
        return boost::multiprecision::msb(x) + 1;
    }

    auto is_power_of_two(const BigInt & x) -> bool
    {
        return x > 0 && boost::multiprecision::lsb(x) == boost::multiprecision::msb(x);
    }

    auto to_decimal(const BigInt & x) -> string
    {
        return x.str();
    }

    Exponent::Exponent(BigInt value) :
        _offset(std::move(value)),
        _coeff(0),
        _shift(0)
    {
    }

    Exponent::Exponent(BigInt offset, BigInt coeff, BigInt shift) :
        _offset(std::move(offset)),
        _coeff(std::move(coeff)),
        _shift(std::move(shift))
    {
        normalise();
    }

    auto Exponent::normalise() -> void
    {
        if (_coeff < 0 || _shift < 0)
            throw std::invalid_argument("exponent coefficient and shift must be nonnegative");
        if (_coeff == 0) {
            _shift = 0;
            return;
        }
        auto tz = boost::multiprecision::lsb(_coeff);
        _coeff >>= tz;
        _shift += tz;
        if (_shift <= fold_shift) {
            _offset += _coeff << _shift.convert_to<unsigned>();
            _coeff = 0;
            _shift = 0;
        }
    }

    auto Exponent::plain() const -> const BigInt &
    {
        if (! is_plain())
            throw CapacityError("exponent is not materializable");
        return _offset;
    }

    auto Exponent::operator+(const Exponent & other) const -> Exponent
    {
        if (is_plain())
            return Exponent(_offset + other._offset, other._coeff, other._shift);
        if (other.is_plain())
            return Exponent(_offset + other._offset, _coeff, _shift);

        const Exponent & lo = _shift <= other._shift ? *this : other;
        const Exponent & hi = _shift <= other._shift ? other : *this;
        auto gap = small_shift(hi._shift - lo._shift);
        return Exponent(_offset + other._offset, (hi._coeff << gap) + lo._coeff, lo._shift);
    }

    auto Exponent::operator-(const Exponent & other) const -> Exponent
    {
        if (other.is_plain())
            return Exponent(_offset - other._offset, _coeff, _shift);
        if (is_plain())
            throw CapacityError("exponent difference has a negative coefficient");

        auto low = std::min(_shift, other._shift);
        auto coeff = (_coeff << small_shift(_shift - low)) - (other._coeff << small_shift(other._shift - low));
        if (coeff < 0)
            throw CapacityError("exponent difference has a negative coefficient");
        return Exponent(_offset - other._offset, coeff, low);
    }

    auto Exponent::operator*(const BigInt & k) const -> Exponent
    {
        if (k < 0)
            throw std::invalid_argument("exponent scale must be nonnegative");
        return Exponent(_offset * k, _coeff * k, _shift);
    }

    auto Exponent::operator==(const Exponent & other) const -> bool
    {
        return (*this <=> other) == strong_ordering::equal;
    }

    auto Exponent::operator<=>(const Exponent & other) const -> strong_ordering
    {
        // sign of (o1 - o2) + c1 2^s1 - c2 2^s2
        BigInt o = _offset - other._offset;

        if (is_plain() && other.is_plain())
            return sign_of(o);

        if (other.is_plain() || is_plain()) {
            const Exponent & big = is_plain() ? other : *this;
            BigInt signed_o = is_plain() ? BigInt(-o) : o;
            strong_ordering result = strong_ordering::equal;
            if (abs_bits(signed_o) < big._shift)
                result = strong_ordering::greater;
            else {
                auto s = big._shift.convert_to<unsigned>();
                result = sign_of(signed_o + (big._coeff << s));
            }
            if (is_plain())
                return 0 <=> result;
            return result;
        }

        const Exponent & lo = _shift <= other._shift ? *this : other;
        const Exponent & hi = _shift <= other._shift ? other : *this;
        bool hi_is_this = &hi == this;
        BigInt gap = hi._shift - lo._shift;

        if (gap > max_shift_gap) {
            // the term with the larger shift dominates everything else
            BigInt lo_reach = lo._shift + bit_length(lo._coeff) + 1;
            if (hi._shift > lo_reach && hi._shift > BigInt(abs_bits(o) + 1))
                return hi_is_this ? strong_ordering::greater : strong_ordering::less;
            throw CapacityError("exponent comparison outside the representable window");
        }

        auto g = gap.convert_to<unsigned>();
        BigInt c = hi_is_this ? BigInt((hi._coeff << g) - lo._coeff) : BigInt(lo._coeff - (hi._coeff << g));
        if (c == 0)
            return sign_of(o);
        if (abs_bits(o) < lo._shift)
            return sign_of(c);
        auto s = lo._shift.convert_to<unsigned>();
        return sign_of(o + (c << s));
    }

    auto Exponent::to_json() const -> json
    {
        if (is_plain())
            return bigint_to_json(_offset);
        return json{ { "offset", to_decimal(_offset) }, { "coeff", to_decimal(_coeff) }, { "shift", to_decimal(_shift) } };
    }

    auto Exponent::from_json(const json & j) -> Exponent
    {
        if (j.is_object())
            return Exponent(bigint_from_json(j.at("offset")), bigint_from_json(j.at("coeff")), bigint_from_json(j.at("shift")));
        return Exponent(bigint_from_json(j));
    }

    BigNumber::BigNumber(BigInt value) :
        _value(std::move(value))
    {
        if (_value < 1)
            throw std::invalid_argument("BigNumber must be positive");
        auto bits = bit_length(_value);
        if (bits > materialize_bits) {
            if (! is_power_of_two(_value))
                throw CapacityError("integer too large and not a power of two");
            _materialized = false;
            _log2 = Exponent(BigInt(bits - 1));
            _value = 0;
        }
    }

    auto BigNumber::power_of_two(const Exponent & e) -> BigNumber
    {
        if (e.is_plain()) {
            if (e.plain() < 0)
                throw std::invalid_argument("negative power of two");
            if (e.plain() < materialize_bits)
                return BigNumber(BigInt(1) << e.plain().convert_to<unsigned>());
        }
        BigNumber result;
        result._materialized = false;
        result._value = 0;
        result._log2 = e;
        return result;
    }

    auto BigNumber::value() const -> const BigInt &
    {
        if (! _materialized)
            throw CapacityError("number is only available in exponent form");
        return _value;
    }

    auto BigNumber::to_u64() const -> optional<std::uint64_t>
    {
        if (! _materialized || bit_length(_value) > 64)
            return std::nullopt;
        return _value.convert_to<std::uint64_t>();
    }

    auto BigNumber::log2_exact() const -> optional<Exponent>
    {
        if (! _materialized)
            return _log2;
        if (! is_power_of_two(_value))
            return std::nullopt;
        return Exponent(BigInt(bit_length(_value) - 1));
    }

    auto BigNumber::operator*(const BigNumber & other) const -> BigNumber
    {
        if (_materialized && other._materialized && bit_length(_value) + bit_length(other._value) <= 2 * materialize_bits)
            return BigNumber(BigInt(_value * other._value));
        auto a = log2_exact(), b = other.log2_exact();
        if (! a || ! b)
            throw CapacityError("product is neither materializable nor a power of two");
        return power_of_two(*a + *b);
    }

    auto BigNumber::pow(const BigInt & k) const -> BigNumber
    {
        if (k < 0)
            throw std::invalid_argument("negative power");
        if (k == 0 || (_materialized && _value == 1))
            return BigNumber(1);
        if (_materialized && BigInt(bit_length(_value) - 1) * k < materialize_bits)
            return BigNumber(BigInt(boost::multiprecision::pow(_value, k.convert_to<unsigned>())));
        auto e = log2_exact();
        if (! e)
            throw CapacityError("power is neither materializable nor a power of two");
        return power_of_two(*e * k);
    }

    auto BigNumber::ceil_div(const BigNumber & other) const -> BigNumber
    {
        if (_materialized && other._materialized)
            return BigNumber(BigInt((_value + other._value - 1) / other._value));
        if (*this <= other)
            return BigNumber(1);
        auto a = log2_exact(), b = other.log2_exact();
        if (! a || ! b)
            throw CapacityError("quotient is neither materializable nor a power of two");
        return power_of_two(*a - *b);
    }

    auto BigNumber::operator==(const BigNumber & other) const -> bool
    {
        return (*this <=> other) == strong_ordering::equal;
    }

    auto BigNumber::operator<=>(const BigNumber & other) const -> strong_ordering
    {
        if (_materialized && other._materialized)
            return three_way(_value, other._value);
        if (! _materialized && ! other._materialized)
            return _log2 <=> other._log2;

        // x materialized against 2^e: 2^{b-1} <= x < 2^b
        const BigNumber & mat = _materialized ? *this : other;
        const Exponent & e = _materialized ? other._log2 : _log2;
        Exponent top(BigInt(bit_length(mat._value) - 1));
        auto c = top <=> e;
        strong_ordering mat_vs_pow = c != strong_ordering::equal ? c
            : is_power_of_two(mat._value) ? strong_ordering::equal : strong_ordering::greater;
        return _materialized ? mat_vs_pow : 0 <=> mat_vs_pow;
    }

    auto BigNumber::to_json() const -> json
    {
        if (_materialized) {
            if (auto v = to_u64())
                return *v;
            return to_decimal(_value);
        }
        return json{ { "base", 2 }, { "exp", _log2.to_json() } };
    }

    auto BigNumber::to_string() const -> string
    {
        if (_materialized)
            return to_decimal(_value);
        return "2^" + _log2.to_json().dump();
    }

    auto BigNumber::from_json(const json & j) -> BigNumber
    {
        if (j.is_object()) {
            BigInt base = bigint_from_json(j.at("base"));
            Exponent e = Exponent::from_json(j.at("exp"));
            if (base < 1)
                throw InvalidQuery("exponent-form base must be positive");
            if (base == 1)
                return BigNumber(1);
            if (is_power_of_two(base))
                return power_of_two(e * BigInt(bit_length(base) - 1));
            return BigNumber(base).pow(e.plain());
        }
        return BigNumber(bigint_from_json(j));
    }

    auto FastProfile::width(size_t i) const -> size_t
    {
        auto v = levels.at(i).m.to_u64();
        if (! v)
            throw CapacityError("m_" + std::to_string(i) + " is too large to build");
        return *v;
    }

    auto FastProfile::small_at(size_t i) const -> size_t
    {
        auto v = levels.at(i).small.to_u64();
        if (! v)
            throw CapacityError("small_" + std::to_string(i) + " is too large to use");
        return *v;
    }

    auto FastProfile::large_at(size_t i) const -> size_t
    {
        auto v = levels.at(i).large.to_u64();
        if (! v)
            throw CapacityError("large_" + std::to_string(i) + " is too large to use");
        return *v;
    }

    auto self_power(size_t i) -> BigInt
    {
        // 0^0 is taken to be 1
        if (i == 0)
            return 1;
        return boost::multiprecision::pow(BigInt(i), static_cast<unsigned>(i));
    }

    auto fast_bound(const BigNumber & m_circ, size_t i) -> BigNumber
    {
        auto s = m_circ.pow(self_power(i));
        if (s.is_materialized())
            return s.pow(4 * s.value());
        // log2 of s^{4s} is 4 e 2^e where s = 2^e
        auto e = s.log2_exact();
        if (! e->is_plain())
            throw CapacityError("fast-growth bound needs a third exponent level at i=" + std::to_string(i));
        return BigNumber::power_of_two(Exponent(0, 4 * e->plain(), e->plain()));
    }

    auto literal_fast_prefix(size_t depth) -> FastProfile
    {
        FastProfile profile;
        profile.mode = ProfileMode::literal;
        profile.i_star = 1;
        for (size_t i = 0 ; i < depth ; ++i) {
            FastLevel level;
            level.m_circ = i == 0 ? BigNumber(1) : profile.levels.back().m_circ * profile.levels.back().m;
            level.m = fast_bound(level.m_circ, i);
            if (i == 0 && level.m < BigNumber(2))
                level.m = BigNumber(2);
            level.small = level.m_circ.pow(self_power(i));
            level.large = level.m.ceil_div(level.small);
            profile.levels.push_back(std::move(level));
        }
        return profile;
    }

    auto make_scaled_profile(const vector<ScaledLevel> & levels, size_t i_star) -> FastProfile
    {
        FastProfile profile;
        profile.mode = ProfileMode::scaled;
        profile.i_star = i_star;
        for (auto & l : levels) {
            FastLevel level;
            level.m_circ = profile.levels.empty() ? BigNumber(1) : profile.levels.back().m_circ * profile.levels.back().m;
            level.m = BigNumber(l.m);
            level.small = BigNumber(l.small);
            level.large = BigNumber(l.large);
            level.p = l.p;
            profile.levels.push_back(std::move(level));
        }
        return profile;
    }

    auto check_fast(const FastProfile & profile) -> Verdict
    {
        auto fail = [] (size_t level, string reason) {
            return Verdict{ false, level, std::move(reason) };
        };

        if (profile.levels.empty())
            return Verdict{ false, std::nullopt, "profile has no levels" };

        try {
            auto & levels = profile.levels;
            if (levels[0].m_circ != BigNumber(1))
                return fail(0, "m_circ_0 must be 1");
            if (levels[0].m <= BigNumber(1))
                return fail(0, "m_0 > 1 violated");
            for (size_t i = 0 ; i + 1 < levels.size() ; ++i)
                if (levels[i + 1].m_circ != levels[i].m_circ * levels[i].m)
                    return fail(i + 1, "m_circ is not the running product of m");

            for (size_t i = 0 ; i < levels.size() ; ++i) {
                auto & l = levels[i];
                if (profile.mode == ProfileMode::literal) {
                    if (l.m < fast_bound(l.m_circ, i))
                        return fail(i, "m_i below the fast-growth bound");
                    auto small = l.m_circ.pow(self_power(i));
                    if (l.small != small)
                        return fail(i, "small_i differs from (m_circ_i)^(i^i)");
                    if (l.large != l.m.ceil_div(small))
                        return fail(i, "large_i differs from m_i / (m_circ_i)^(i^i)");
                }
                else {
                    if (l.small < BigNumber(std::uint64_t(i + 2)))
                        return fail(i, "small_i >= i+2 violated");
                    if (l.small >= l.large)
                        return fail(i, "small_i < large_i violated");
                    if (l.large > l.m)
                        return fail(i, "large_i <= m_i violated");
                    if (i >= profile.i_star && i + 1 < levels.size()) {
                        if (levels[i + 1].small < l.small)
                            return fail(i + 1, "small is not nondecreasing");
                        if (levels[i + 1].large < l.large)
                            return fail(i + 1, "large is not nondecreasing");
                    }
                    if (i >= 1) {
                        if (! l.p)
                            return fail(i, "scaled level has no edge probability");
                        if (*l.p < 0 || *l.p > 1)
                            return fail(i, "edge probability outside [0,1]");
                    }
                }
            }
        }
        catch (const CapacityError & e) {
            return Verdict{ false, std::nullopt, string("not representable: ") + e.what() };
        }
        return Verdict{};
    }

    auto g(const FastProfile & profile, size_t i) -> BigNumber
    {
        return BigNumber(2) * profile.levels.at(i).m_circ.pow(self_power(i));
    }

    auto check_obs_four(const FastProfile & profile, size_t i) -> bool
    {
        if (profile.mode != ProfileMode::literal)
            throw NotApplicable("check_obs_four applies to literal profiles only");
        auto & l = profile.levels.at(i);
        // 4 i^i log m_circ < log m  <=>  m_circ^{4 i^i} < m
        return l.m_circ.pow(4 * self_power(i)) < l.m;
    }

    auto bigint_to_json(const BigInt & x) -> json
    {
        if (x >= 0 && bit_length(x) <= 63)
            return x.convert_to<std::int64_t>();
        if (x < 0 && bit_length(BigInt(-x)) <= 62)
            return x.convert_to<std::int64_t>();
        return to_decimal(x);
    }

    auto bigint_from_json(const json & j) -> BigInt
    {
        if (j.is_number_unsigned())
            return BigInt(j.get<std::uint64_t>());
        if (j.is_number_integer())
            return BigInt(j.get<std::int64_t>());
        if (j.is_string()) {
            auto s = j.get<string>();
            auto digits = s.substr(! s.empty() && s[0] == '-' ? 1 : 0);
            if (digits.empty() || digits.find_first_not_of("0123456789") != string::npos)
                throw InvalidQuery("not an integer: '" + s + "'");
            BigInt v = parse_decimal(digits);
            return s[0] == '-' ? BigInt(-v) : v;
        }
        throw InvalidQuery("expected an integer, got " + j.dump());
    }

    auto rational_to_json(const Rational & r) -> json
    {
        return json{ { "num", bigint_to_json(boost::multiprecision::numerator(r)) },
            { "den", bigint_to_json(boost::multiprecision::denominator(r)) } };
    }

    auto rational_from_json(const json & j) -> Rational
    {
        if (j.is_object()) {
            BigInt den = bigint_from_json(j.at("den"));
            if (den == 0)
                throw InvalidQuery("zero denominator");
            return Rational(bigint_from_json(j.at("num")), den);
        }
        if (j.is_string())
            return parse_decimal_rational(j.get<string>());
        if (j.is_number_integer())
            return Rational(bigint_from_json(j));
        throw InvalidQuery("rationals are written as {num, den} or a decimal string, got " + j.dump());
    }

    auto profile_to_json(const FastProfile & profile) -> json
    {
        json levels = json::array();
        for (auto & l : profile.levels) {
            json level{ { "m", l.m.to_json() }, { "m_circ", l.m_circ.to_json() },
                { "small", l.small.to_json() }, { "large", l.large.to_json() } };
            if (l.p)
                level["p"] = rational_to_json(*l.p);
            levels.push_back(level);
        }
        return json{ { "version", 1 }, { "mode", profile.mode == ProfileMode::literal ? "literal" : "scaled" },
            { "levels", levels }, { "i_star", profile.i_star } };
    }

    auto profile_from_json(const json & j) -> FastProfile
    {
        try {
            if (j.at("version").get<int>() != 1)
                throw InvalidQuery("unsupported profile version");
            FastProfile profile;
            auto mode = j.at("mode").get<string>();
            if (mode == "literal")
                profile.mode = ProfileMode::literal;
            else if (mode == "scaled")
                profile.mode = ProfileMode::scaled;
            else
                throw InvalidQuery("unknown profile mode '" + mode + "'");
            profile.i_star = j.at("i_star").get<size_t>();
            for (auto & l : j.at("levels")) {
                FastLevel level;
                level.m = BigNumber::from_json(l.at("m"));
                level.small = BigNumber::from_json(l.at("small"));
                level.large = BigNumber::from_json(l.at("large"));
                if (l.contains("m_circ"))
                    level.m_circ = BigNumber::from_json(l.at("m_circ"));
                else
                    level.m_circ = profile.levels.empty() ? BigNumber(1) : profile.levels.back().m_circ * profile.levels.back().m;
                if (l.contains("p"))
                    level.p = rational_from_json(l.at("p"));
                profile.levels.push_back(std::move(level));
            }
            return profile;
        }
        catch (const json::exception & e) {
            throw InvalidQuery(string("malformed profile: ") + e.what());
        }
    }

    auto load_profile(const string & path) -> FastProfile
    {
        std::ifstream in(path);
        if (! in)
            throw InvalidQuery("cannot read profile '" + path + "'");
        json j;
        try {
            in >> j;
        }
        catch (const json::exception & e) {
            throw InvalidQuery("profile '" + path + "' is not valid JSON: " + e.what());
        }
        return profile_from_json(j);
    }
}
