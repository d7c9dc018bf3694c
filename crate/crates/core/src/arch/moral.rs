use std::fmt;
use std::str::FromStr;

/// Discretised take-over judgement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VirtuousClass {
    /// Below 5: no virtuous reason to take control.
    Class0,
    /// `[5, 6)`: grey state.
    Class1,
    /// 6 and above: taking control is virtuous.
    Class2,
}

impl VirtuousClass {
    pub const ALL: [VirtuousClass; 3] = [VirtuousClass::Class0, VirtuousClass::Class1, VirtuousClass::Class2];

    pub fn index(self) -> u8 {
        self as u8
    }
}

impl fmt::Display for VirtuousClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

impl FromStr for VirtuousClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().trim_start_matches("class") {
            "0" => Ok(VirtuousClass::Class0),
            "1" => Ok(VirtuousClass::Class1),
            "2" => Ok(VirtuousClass::Class2),
            _ => Err(format!("not a virtuous class: `{s}`")),
        }
    }
}

pub fn classify_takeover(vmec_out: f64) -> VirtuousClass {
    if vmec_out < 5.0 {
        VirtuousClass::Class0
    } else if vmec_out < 6.0 {
        VirtuousClass::Class1
    } else {
        VirtuousClass::Class2
    }
}

/// Who is driving.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ControlState {
    Human,
    Iav,
}

/// Take over on class 2, hand back on class 0; the grey state never forces
/// a change.
pub fn control_transition(state: ControlState, class: VirtuousClass) -> ControlState {
    match (state, class) {
        (ControlState::Human, VirtuousClass::Class2) => ControlState::Iav,
        (ControlState::Iav, VirtuousClass::Class0) => ControlState::Human,
        (s, _) => s,
    }
}
