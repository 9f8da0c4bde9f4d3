//! Leader-side admission policies, selectable by name.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::identity::{verify_userinfo, DeviceId, UserId, UserInfo};

/// Decides whether a verified requester may enter.
pub trait AuthorizationPolicy: fmt::Debug {
    fn name(&self) -> &'static str;
    fn authorize(&self, user: &UserId, device: &DeviceId, info: &UserInfo) -> bool;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct AllowAll;

impl AuthorizationPolicy for AllowAll {
    fn name(&self) -> &'static str {
        "allow-all"
    }

    fn authorize(&self, _: &UserId, _: &DeviceId, _: &UserInfo) -> bool {
        true
    }
}

#[derive(Debug, Default, Clone)]
pub struct DenyList {
    users: BTreeSet<String>,
}

impl DenyList {
    pub fn new<I, S>(users: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            users: users.into_iter().map(Into::into).collect(),
        }
    }
}

impl AuthorizationPolicy for DenyList {
    fn name(&self) -> &'static str {
        "deny-list"
    }

    fn authorize(&self, user: &UserId, _: &DeviceId, _: &UserInfo) -> bool {
        !self.users.contains(user.as_str())
    }
}

/// An off-ledger opening of a userinfo commitment.
#[derive(Clone, PartialEq, Eq)]
pub struct Opening {
    pub plaintext: Vec<u8>,
    pub r: [u8; 32],
}

impl fmt::Debug for Opening {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Opening")
            .field("len", &self.plaintext.len())
            .finish_non_exhaustive()
    }
}

pub type Openings = BTreeMap<(UserId, DeviceId), Opening>;

/// Admits only requesters whose on-ledger commitment opens correctly.
#[derive(Debug, Default, Clone)]
pub struct CommitmentPolicy {
    openings: Openings,
}

impl CommitmentPolicy {
    pub fn new(openings: Openings) -> Self {
        Self { openings }
    }
}

impl AuthorizationPolicy for CommitmentPolicy {
    fn name(&self) -> &'static str {
        "commitment"
    }

    fn authorize(&self, user: &UserId, device: &DeviceId, info: &UserInfo) -> bool {
        self.openings
            .get(&(user.clone(), device.clone()))
            .is_some_and(|o| verify_userinfo(info, &o.plaintext, &o.r))
    }
}

/// Builds a policy from its scenario arguments and the openings the leader holds.
pub type PolicyFactory = fn(&[String], &Openings) -> Box<dyn AuthorizationPolicy>;

#[derive(Clone)]
pub struct PolicyRegistry {
    factories: BTreeMap<&'static str, PolicyFactory>,
}

impl PolicyRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut reg = Self::empty();
        reg.register("allow-all", |_, _| Box::new(AllowAll));
        reg.register("deny-list", |args, _| Box::new(DenyList::new(args.iter().cloned())));
        reg.register("commitment", |_, openings| {
            Box::new(CommitmentPolicy::new(openings.clone()))
        });
        reg
    }

    pub fn register(&mut self, name: &'static str, factory: PolicyFactory) {
        self.factories.insert(name, factory);
    }

    pub fn build(&self, name: &str, args: &[String], openings: &Openings) -> Option<Box<dyn AuthorizationPolicy>> {
        self.factories.get(name).map(|f| f(args, openings))
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.factories.keys().copied()
    }
}

impl Default for PolicyRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl fmt::Debug for PolicyRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.factories.keys()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identity::commit_userinfo;

    fn ids(u: &str) -> (UserId, DeviceId) {
        (UserId::new(u).unwrap(), DeviceId::new("pc").unwrap())
    }

    #[test]
    fn registry_builds_each_builtin_by_name() {
        let reg = PolicyRegistry::builtin();
        assert_eq!(
            reg.names().collect::<Vec<_>>(),
            ["allow-all", "commitment", "deny-list"]
        );
        for name in reg.names() {
            assert_eq!(reg.build(name, &[], &Openings::new()).unwrap().name(), name);
        }
        assert!(reg.build("vote", &[], &Openings::new()).is_none());
    }

    #[test]
    fn deny_list_blocks_listed_users_only() {
        let p = DenyList::new(["eve"]);
        let info = UserInfo::Plain(String::new());
        let (eve, d) = ids("eve");
        let (bob, _) = ids("bob");
        assert!(!p.authorize(&eve, &d, &info));
        assert!(p.authorize(&bob, &d, &info));
    }

    #[test]
    fn commitment_policy_needs_a_matching_opening() {
        let (u, d) = ids("bob");
        let r = [5u8; 32];
        let info = commit_userinfo(b"Bob, work at Company A", &r);
        let good = Opening {
            plaintext: b"Bob, work at Company A".to_vec(),
            r,
        };
        let p = CommitmentPolicy::new(Openings::from([((u.clone(), d.clone()), good.clone())]));
        assert!(p.authorize(&u, &d, &info));
        let wrong_r = CommitmentPolicy::new(Openings::from([(
            (u.clone(), d.clone()),
            Opening { r: [6; 32], ..good },
        )]));
        assert!(!wrong_r.authorize(&u, &d, &info));
        assert!(!CommitmentPolicy::default().authorize(&u, &d, &info));
        assert!(!p.authorize(&u, &d, &UserInfo::Plain("Bob, work at Company A".into())));
    }
}
