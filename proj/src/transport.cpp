#include "fedvit/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <thread>

#include "fedvit/errors.hpp"

namespace fedvit {

namespace {

[[noreturn]] void raise_errno(const std::string& what, const std::string& who) {
    throw TransportError(what + " (" + who + "): " + std::strerror(errno));
}

// ---------------------------------------------------------------- loopback

struct LoopbackChannel {
    std::mutex mu;
    std::condition_variable cv;
    std::deque<std::vector<std::uint8_t>> a_to_b;
    std::deque<std::vector<std::uint8_t>> b_to_a;
    bool closed = false;
};

class LoopbackEndpoint : public Endpoint {
public:
    LoopbackEndpoint(std::shared_ptr<LoopbackChannel> ch, bool is_a, std::string name)
        : ch_(std::move(ch)), is_a_(is_a), name_(std::move(name)) {}

    ~LoopbackEndpoint() override { close(); }

    void send(const RoundMessage& msg) override {
        auto bytes = encode(msg);
        std::lock_guard lock(ch_->mu);
        if (ch_->closed) throw TransportError("loopback send on closed channel (" + name_ + ")");
        (is_a_ ? ch_->a_to_b : ch_->b_to_a).push_back(std::move(bytes));
        ch_->cv.notify_all();
    }

    RoundMessage recv() override {
        std::unique_lock lock(ch_->mu);
        auto& inbox = is_a_ ? ch_->b_to_a : ch_->a_to_b;
        ch_->cv.wait(lock, [&] { return !inbox.empty() || ch_->closed; });
        if (inbox.empty()) throw TransportError("loopback channel closed (" + name_ + ")");
        auto bytes = std::move(inbox.front());
        inbox.pop_front();
        lock.unlock();
        return decode(bytes);
    }

    void close() override {
        std::lock_guard lock(ch_->mu);
        ch_->closed = true;
        ch_->cv.notify_all();
    }

    std::string peer() const override { return name_; }

private:
    std::shared_ptr<LoopbackChannel> ch_;
    bool is_a_;
    std::string name_;
};

// ------------------------------------------------------------------ socket

class SocketEndpoint : public Endpoint {
public:
    SocketEndpoint(int fd, std::string peer) : fd_(fd), peer_(std::move(peer)) {
        int one = 1;
        ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    }

    ~SocketEndpoint() override { close(); }

    void send(const RoundMessage& msg) override {
        const auto bytes = encode(msg);
        std::size_t off = 0;
        while (off < bytes.size()) {
            const ssize_t n = ::send(fd_, bytes.data() + off, bytes.size() - off, MSG_NOSIGNAL);
            if (n < 0) {
                if (errno == EINTR) continue;
                raise_errno("send failed", peer_);
            }
            off += static_cast<std::size_t>(n);
        }
    }

    RoundMessage recv() override {
        std::uint8_t header[4];
        read_exact(header, 4);
        std::uint32_t declared;
        std::memcpy(&declared, header, 4);
        if (declared > kMaxFrameBytes) {
            throw CorruptFrameError("frame length " + std::to_string(declared) + " from " + peer_);
        }
        std::vector<std::uint8_t> frame(4 + declared);
        std::memcpy(frame.data(), header, 4);
        read_exact(frame.data() + 4, declared);
        return decode(frame);
    }

    void close() override {
        if (fd_ >= 0) {
            ::shutdown(fd_, SHUT_RDWR);
            ::close(fd_);
            fd_ = -1;
        }
    }

    std::string peer() const override { return peer_; }

private:
    int fd_;
    std::string peer_;

    void read_exact(std::uint8_t* out, std::size_t n) {
        std::size_t off = 0;
        while (off < n) {
            const ssize_t got = ::recv(fd_, out + off, n - off, 0);
            if (got < 0) {
                if (errno == EINTR) continue;
                raise_errno("recv failed", peer_);
            }
            if (got == 0) throw TransportError("connection closed by peer (" + peer_ + ")");
            off += static_cast<std::size_t>(got);
        }
    }
};

}  // namespace

std::pair<std::unique_ptr<Endpoint>, std::unique_ptr<Endpoint>> loopback_pair() {
    auto ch = std::make_shared<LoopbackChannel>();
    return {std::make_unique<LoopbackEndpoint>(ch, true, "loopback:a"),
            std::make_unique<LoopbackEndpoint>(ch, false, "loopback:b")};
}

SocketListener::SocketListener(const std::string& address, std::uint16_t port)
    : address_(address) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) raise_errno("socket failed", address);
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, address.c_str(), &addr.sin_addr) != 1) {
        ::close(fd_);
        fd_ = -1;
        throw TransportError("invalid listen address: " + address);
    }
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
        const int saved = errno;
        ::close(fd_);
        fd_ = -1;
        errno = saved;
        raise_errno("bind failed", address + ":" + std::to_string(port));
    }
    if (::listen(fd_, 64) < 0) raise_errno("listen failed", address);

    sockaddr_in bound{};
    socklen_t len = sizeof(bound);
    if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len) < 0) {
        raise_errno("getsockname failed", address);
    }
    port_ = ntohs(bound.sin_port);
}

SocketListener::~SocketListener() { close(); }

std::unique_ptr<Endpoint> SocketListener::accept() {
    sockaddr_in peer{};
    socklen_t len = sizeof(peer);
    const int fd = ::accept(fd_, reinterpret_cast<sockaddr*>(&peer), &len);
    if (fd < 0) raise_errno("accept failed", address_ + ":" + std::to_string(port_));
    char buf[INET_ADDRSTRLEN] = {};
    ::inet_ntop(AF_INET, &peer.sin_addr, buf, sizeof(buf));
    return std::make_unique<SocketEndpoint>(
        fd, std::string(buf) + ":" + std::to_string(ntohs(peer.sin_port)));
}

void SocketListener::close() {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

std::unique_ptr<Endpoint> socket_connect(const std::string& address, std::uint16_t port,
                                         int max_retries) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, address.c_str(), &addr.sin_addr) != 1) {
        throw TransportError("invalid connect address: " + address);
    }
    const std::string who = address + ":" + std::to_string(port);
    for (int attempt = 0;; ++attempt) {
        const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd < 0) raise_errno("socket failed", who);
        if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0) {
            return std::make_unique<SocketEndpoint>(fd, who);
        }
        const int saved = errno;
        ::close(fd);
        if (attempt >= max_retries) {
            errno = saved;
            raise_errno("connect failed", who);
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
}

}  // namespace fedvit
