// @xenova/transformers is an optionalDependency (its native image
// dependency needs network at install time); it is only loaded
// dynamically at runtime, so an ambient declaration keeps the build
// independent of whether it is present.
declare module "@xenova/transformers";
