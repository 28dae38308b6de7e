#pragma once

#include <memory>
#include <string>
#include <utility>

#include "fedvit/wire.hpp"

namespace fedvit {

/// Ordered, reliable, bidirectional message channel. One reader and one
/// writer per side; send(m) on one end yields a decode-equal m at the
/// other.
class Endpoint {
public:
    virtual ~Endpoint() = default;
    virtual void send(const RoundMessage& msg) = 0;
    virtual RoundMessage recv() = 0;  // blocks; throws TransportError when closed
    virtual void close() = 0;
    virtual std::string peer() const = 0;
};

/// In-process channel. Messages still pass through encode/decode so both
/// carriers exercise the same codec.
std::pair<std::unique_ptr<Endpoint>, std::unique_ptr<Endpoint>> loopback_pair();

/// TCP listener bound to address:port (port 0 picks an ephemeral port).
class SocketListener {
public:
    SocketListener(const std::string& address, std::uint16_t port);
    ~SocketListener();
    SocketListener(const SocketListener&) = delete;
    SocketListener& operator=(const SocketListener&) = delete;

    std::uint16_t port() const { return port_; }
    std::unique_ptr<Endpoint> accept();
    void close();

private:
    int fd_ = -1;
    std::uint16_t port_ = 0;
    std::string address_;
};

/// Connect to a listening server, retrying while it comes up.
std::unique_ptr<Endpoint> socket_connect(const std::string& address, std::uint16_t port,
                                         int max_retries = 50);

}  // namespace fedvit
