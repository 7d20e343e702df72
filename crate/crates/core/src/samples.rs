//! The distributed authentication protocol, used as a worked example.
//!
//! `Client` sends its credentials to the identity provider `Ip`, which checks
//! them and tells both `Server` and `Client` the outcome. On success `Server`
//! sends `Client` a token.

use crate::cc::ChorProgram;
use crate::combinators::*;
use crate::ident::Ann;
use crate::sp::{Behaviour, Branch};

/// The protocol with string expressions passed through to generated code.
pub fn auth_program() -> ChorProgram {
    prog(
        vec![],
        vec![
            ann("authenticate", com("Client", var("credentials"), "Ip", "credentials")),
            cond(
                "Ip",
                opaque("check(credentials)"),
                vec![
                    ann("authOk", left("Ip", "Server")),
                    ann("authOk", left("Ip", "Client")),
                    ann("acceptToken", com("Server", opaque("makeToken"), "Client", "token")),
                ],
                vec![
                    ann("authFail", right("Ip", "Server")),
                    ann("authFail", right("Ip", "Client")),
                ],
            ),
        ],
    )
}

/// Expected projection of [`auth_program`] onto `Client`.
pub fn auth_client_behaviour() -> Behaviour {
    let a = |s: &str| Some(Ann::new(s).unwrap());
    Behaviour::send(
        pid("Ip"),
        var("credentials"),
        a("authenticate"),
        Behaviour::Offer {
            from: pid("Ip"),
            left: Some(Branch::new(
                a("authOk"),
                Behaviour::recv(pid("Server"), var_name("token"), a("acceptToken"), Behaviour::End),
            )),
            right: Some(Branch::new(a("authFail"), Behaviour::End)),
        },
    )
}
