pub struct SupportSet;
