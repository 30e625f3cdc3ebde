#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "trident/marketplace.hpp"

namespace trident {

// Line-delimited JSON. The first line is a header carrying the market
// configuration; each further line is one applied command:
//   {"seq":..,"caller":..,"op":..,"args":{..},"event":{..}}
class LogFormatError : public std::runtime_error {
public:
    LogFormatError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

struct CommandLog {
    MarketConfig config;
    std::vector<LogEntry> entries;
};

std::string entry_line(const LogEntry& entry);
LogEntry parse_entry_line(const std::string& line); // throws CodecError / json errors

void write_log(std::ostream& out, const Market& market);
CommandLog read_log(std::istream& in);

// Reads and replays; format errors carry the line, replay errors the entry.
Market replay_log(std::istream& in);

} // namespace trident
