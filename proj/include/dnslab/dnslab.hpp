// Umbrella header: pulls in the whole laboratory library.
#pragma once

#include "dnslab/attacks.hpp"
#include "dnslab/bytes.hpp"
#include "dnslab/endpoint.hpp"
#include "dnslab/forwarder.hpp"
#include "dnslab/live.hpp"
#include "dnslab/message.hpp"
#include "dnslab/name.hpp"
#include "dnslab/nodes.hpp"
#include "dnslab/profile.hpp"
#include "dnslab/resolver.hpp"
#include "dnslab/rng.hpp"
#include "dnslab/scanner.hpp"
#include "dnslab/simnet.hpp"
#include "dnslab/zone.hpp"
#include "dnslab/zoneset.hpp"
