pub struct PhasePortrait;
